use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::algo::{Algo, EntropyMode, TrainConfig};
use crate::error::{Error, Result};
use crate::nets::{ActionScale, Actor, ArchitectureConfig, Critic, PolicyKind};
use crate::nn::{soft_update, Adam, Matrix, ParamBlock};
use crate::replay::Batch;
use crate::rng::{self, streams};
use crate::scalar::Scalar;

/// Losses and temperature reported by one update.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct UpdateStats {
    pub critic_loss: f64,
    /// Present only when the actor was updated.
    pub actor_loss: Option<f64>,
    pub alpha: Option<f64>,
    /// Batch estimate of the policy entropy `-E[log π]` (SAC).
    pub entropy: Option<f64>,
}

/// Online and target networks with their optimizer state.
#[derive(Debug, Clone)]
pub struct Agent<T> {
    pub config: TrainConfig,
    pub actor: Actor<T>,
    /// TD3 only; SAC bootstraps from the online actor.
    pub actor_target: Option<Actor<T>>,
    pub critic: Critic<T>,
    pub critic_target: Critic<T>,
    /// SAC temperature in log space; trained only in auto mode.
    pub log_alpha: ParamBlock<T>,
    optimizer: Adam,
    updates: u64,
    noise_rng: rng::Rng,
}

fn loss_fault(what: &str, value: f64) -> Error {
    Error::Numeric {
        location: what.to_string(),
        detail: format!("loss is {value}"),
    }
}

fn standard_normal<T: Scalar>(rows: usize, cols: usize, rng: &mut rng::Rng) -> Matrix<T> {
    let data = (0..rows * cols).map(|_| T::lit(rng.sample(StandardNormal))).collect();
    Matrix::from_vec(rows, cols, data).expect("sized")
}

fn mean<T: Scalar>(m: &Matrix<T>) -> T {
    m.sum() / T::lit(m.len() as f64)
}

impl<T: Scalar> Agent<T> {
    /// Builds an agent whose networks and noise stream all derive from
    /// `seed`. TD3 needs a deterministic actor and SAC a Gaussian one.
    pub fn new(
        arch: &ArchitectureConfig,
        config: &TrainConfig,
        obs_dim: usize,
        scale: ActionScale<T>,
        seed: u64,
    ) -> Result<Self> {
        config.validate()?;
        let expected = match config.algo {
            Algo::Td3 => PolicyKind::Deterministic,
            Algo::Sac => PolicyKind::Gaussian,
        };
        if arch.policy_kind != expected {
            return Err(Error::Config(format!(
                "{} needs a {expected:?} policy, got {:?}",
                config.algo, arch.policy_kind
            )));
        }
        let act_dim = scale.dim();
        let actor = Actor::build(arch, obs_dim, scale, rng::derive(seed, streams::ACTOR_INIT))?;
        let critic = Critic::build(
            obs_dim,
            act_dim,
            config.critic_hidden,
            rng::derive(seed, streams::CRITIC_INIT),
        )?;
        let init_log_alpha = if config.alpha > 0.0 { config.alpha.ln() } else { f64::NEG_INFINITY };
        Ok(Self {
            config: config.clone(),
            actor_target: (config.algo == Algo::Td3).then(|| actor.clone()),
            critic_target: critic.clone(),
            actor,
            critic,
            log_alpha: ParamBlock::new("log_alpha", Matrix::filled(1, 1, T::lit(init_log_alpha))),
            optimizer: Adam::with_lr(config.lr),
            updates: 0,
            noise_rng: rng::stream(seed, streams::UPDATE_NOISE),
        })
    }

    pub fn act_dim(&self) -> usize {
        self.actor.act_dim()
    }

    /// Gradient updates performed so far.
    pub fn updates(&self) -> u64 {
        self.updates
    }

    /// Current SAC temperature.
    pub fn alpha(&self) -> T {
        match self.config.entropy_mode {
            EntropyMode::Fixed => T::lit(self.config.alpha),
            EntropyMode::Auto => self.log_alpha.value[(0, 0)].exp(),
        }
    }

    pub fn target_entropy(&self) -> f64 {
        -(self.act_dim() as f64)
    }

    /// One gradient update of the configured algorithm.
    pub fn update(&mut self, batch: &Batch<T>) -> Result<UpdateStats> {
        match self.config.algo {
            Algo::Td3 => self.td3_update(batch),
            Algo::Sac => self.sac_update(batch),
        }
    }

    /// TD3 target `r + γ(1-d) min(Q'1, Q'2)(s', ã')` where
    /// `ã' = clip(π'(s') + clip(σ ε, -c, c))` per action dimension, with `σ`
    /// and `c` scaled by the action half-range. `eps` holds standard-normal
    /// draws (`A x B`).
    pub fn td3_critic_target(&self, batch: &Batch<T>, eps: &Matrix<T>) -> Result<Matrix<T>> {
        let target_actor = self
            .actor_target
            .as_ref()
            .ok_or_else(|| Error::State("TD3 target requested from an agent without a target actor".into()))?;
        let mut next_actions = target_actor.act_batch(&batch.next_states)?;
        eps.expect_shape("td3 target noise", next_actions.shape())?;
        let scale = self.actor.scale();
        let sigma = T::lit(self.config.policy_noise);
        let clip = T::lit(self.config.noise_clip);
        for i in 0..next_actions.rows() {
            let half = scale.half_range(i);
            for j in 0..next_actions.cols() {
                let noise = (sigma * half * eps[(i, j)]).max(-clip * half).min(clip * half);
                next_actions[(i, j)] = scale.clip(i, next_actions[(i, j)] + noise);
            }
        }
        let (q1, q2) = self.critic_target.predict(&batch.next_states, &next_actions)?;
        let soft = Matrix::zeros(1, batch.len());
        Ok(self.bootstrap(batch, &q1, &q2, &soft))
    }

    /// SAC target `r + γ(1-d)(min(Q'1, Q'2)(s', ã') - α log π(ã'|s'))` for a
    /// fresh reparameterized sample `ã'` driven by `eps`.
    pub fn sac_critic_target(&self, batch: &Batch<T>, eps: &Matrix<T>) -> Result<Matrix<T>> {
        let sample = self.actor.sample_inference(&batch.next_states, eps)?;
        let (q1, q2) = self.critic_target.predict(&batch.next_states, &sample.actions)?;
        let alpha = self.alpha();
        let soft = sample.log_prob.map(|lp| if alpha == T::zero() { T::zero() } else { alpha * lp });
        Ok(self.bootstrap(batch, &q1, &q2, &soft))
    }

    fn bootstrap(&self, batch: &Batch<T>, q1: &Matrix<T>, q2: &Matrix<T>, soft: &Matrix<T>) -> Matrix<T> {
        let gamma = T::lit(self.config.gamma);
        let mut y = batch.rewards.clone();
        for j in 0..y.cols() {
            let cont = T::one() - batch.done[(0, j)];
            if gamma != T::zero() && cont != T::zero() {
                y[(0, j)] += gamma * cont * (q1[(0, j)].min(q2[(0, j)]) - soft[(0, j)]);
            }
        }
        y
    }

    /// Mean squared error of both critics against `y`, followed by an Adam
    /// step on the critic only.
    pub fn critic_step(&mut self, batch: &Batch<T>, y: &Matrix<T>) -> Result<f64> {
        let (q1, q2) = self.critic.forward(&batch.states, &batch.actions)?;
        let n = T::lit(batch.len() as f64);
        let two = T::lit(2.0);
        let d1 = q1.zip_map(y, |q, t| two * (q - t) / n)?;
        let d2 = q2.zip_map(y, |q, t| two * (q - t) / n)?;
        let loss = q1.zip_map(y, |q, t| (q - t) * (q - t))?.sum() / n + q2.zip_map(y, |q, t| (q - t) * (q - t))?.sum() / n;
        let loss = loss.as_f64();
        if !loss.is_finite() {
            self.critic.clear_cache();
            return Err(loss_fault("critic loss", loss));
        }
        self.critic.q1.backward(&d1)?;
        self.critic.q2.backward(&d2)?;
        self.optimizer.step(&mut self.critic.params_mut())?;
        Ok(loss)
    }

    /// Deterministic policy gradient step maximizing `Q1(s, π(s))`.
    pub fn td3_actor_step(&mut self, states: &Matrix<T>) -> Result<f64> {
        let actions = self.actor.forward_deterministic(states)?;
        let x = self.critic.join(states, &actions)?;
        let q = self.critic.q1.forward(&x)?;
        let n = T::lit(states.cols() as f64);
        let loss = -mean(&q).as_f64();
        if !loss.is_finite() {
            self.critic.clear_cache();
            self.actor.clear_cache();
            return Err(loss_fault("actor loss", loss));
        }
        let dq = Matrix::filled(1, states.cols(), -T::one() / n);
        let dx = self.critic.q1.backward_input(&dq)?;
        self.actor.backward_deterministic(&self.critic.action_grad(&dx))?;
        self.optimizer.step(&mut self.actor.params_mut())?;
        Ok(loss)
    }

    /// `target <- tau * online + (1 - tau) * target` for every target network.
    pub fn soft_update_targets(&mut self) -> Result<()> {
        let tau = T::lit(self.config.tau);
        soft_update(&mut self.critic_target.params_mut(), &self.critic.params(), tau)?;
        if let Some(t) = &mut self.actor_target {
            soft_update(&mut t.params_mut(), &self.actor.params(), tau)?;
        }
        Ok(())
    }

    pub fn td3_update(&mut self, batch: &Batch<T>) -> Result<UpdateStats> {
        let eps = standard_normal(self.act_dim(), batch.len(), &mut self.noise_rng);
        let y = self.td3_critic_target(batch, &eps)?;
        let critic_loss = self.critic_step(batch, &y)?;
        self.updates += 1;
        let mut stats = UpdateStats {
            critic_loss,
            ..Default::default()
        };
        if self.updates % self.config.policy_delay as u64 == 0 {
            stats.actor_loss = Some(self.td3_actor_step(&batch.states)?);
            self.soft_update_targets()?;
        }
        Ok(stats)
    }

    /// `mean(α log π(ã|s) - min(Q1, Q2)(s, ã))` for a fixed sample, without
    /// touching any gradients.
    pub fn sac_actor_loss(&self, states: &Matrix<T>, eps: &Matrix<T>, alpha: T) -> Result<f64> {
        let sample = self.actor.sample_inference(states, eps)?;
        let (q1, q2) = self.critic.predict(states, &sample.actions)?;
        let n = T::lit(states.cols() as f64);
        let mut total = T::zero();
        for j in 0..states.cols() {
            total += alpha * sample.log_prob[(0, j)] - q1[(0, j)].min(q2[(0, j)]);
        }
        Ok((total / n).as_f64())
    }

    /// Reparameterized actor step; returns the loss and the batch mean of
    /// `log π`.
    pub fn sac_actor_step(&mut self, states: &Matrix<T>, eps: &Matrix<T>) -> Result<(f64, f64)> {
        let alpha = self.alpha();
        let sample = self.actor.sample(states, eps)?;
        let (q1, q2) = self.critic.forward(states, &sample.actions)?;
        let b = states.cols();
        let n = T::lit(b as f64);
        let mut d1 = Matrix::zeros(1, b);
        let mut d2 = Matrix::zeros(1, b);
        let mut total = T::zero();
        for j in 0..b {
            let (a, c) = (q1[(0, j)], q2[(0, j)]);
            total += alpha * sample.log_prob[(0, j)] - a.min(c);
            // The min routes the gradient to whichever critic is lower.
            if a <= c {
                d1[(0, j)] = -T::one() / n;
            } else {
                d2[(0, j)] = -T::one() / n;
            }
        }
        let loss = (total / n).as_f64();
        if !loss.is_finite() {
            self.critic.clear_cache();
            self.actor.clear_cache();
            return Err(loss_fault("actor loss", loss));
        }
        let mut dx = self.critic.q1.backward_input(&d1)?;
        dx.add_assign(&self.critic.q2.backward_input(&d2)?)?;
        let d_log_prob = Matrix::filled(1, b, alpha / n);
        self.actor.backward_gaussian(&self.critic.action_grad(&dx), &d_log_prob)?;
        self.optimizer.step(&mut self.actor.params_mut())?;
        Ok((loss, mean(&sample.log_prob).as_f64()))
    }

    /// Temperature step on `α (-log π - H_target)`, differentiated in log
    /// space.
    pub fn alpha_step(&mut self, mean_log_prob: f64) -> Result<()> {
        let alpha = self.alpha().as_f64();
        let g = alpha * (-mean_log_prob - self.target_entropy());
        if !g.is_finite() {
            return Err(loss_fault("temperature gradient", g));
        }
        self.log_alpha.grad[(0, 0)] = T::lit(g);
        self.optimizer.step(&mut [&mut self.log_alpha])
    }

    pub fn sac_update(&mut self, batch: &Batch<T>) -> Result<UpdateStats> {
        let a = self.act_dim();
        let eps_next = standard_normal(a, batch.len(), &mut self.noise_rng);
        let y = self.sac_critic_target(batch, &eps_next)?;
        let critic_loss = self.critic_step(batch, &y)?;
        let eps = standard_normal(a, batch.len(), &mut self.noise_rng);
        let alpha = self.alpha().as_f64();
        let (actor_loss, mean_log_prob) = self.sac_actor_step(&batch.states, &eps)?;
        if self.config.entropy_mode == EntropyMode::Auto {
            self.alpha_step(mean_log_prob)?;
        }
        self.soft_update_targets()?;
        self.updates += 1;
        Ok(UpdateStats {
            critic_loss,
            actor_loss: Some(actor_loss),
            alpha: Some(alpha),
            entropy: Some(-mean_log_prob),
        })
    }

    /// Action for environment interaction during training: Gaussian
    /// exploration around the deterministic action for TD3, a policy sample
    /// for SAC.
    pub fn explore(&mut self, state: &[T]) -> Result<Vec<T>> {
        match self.config.algo {
            Algo::Td3 => {
                let mut a = self.actor.act(state)?;
                let sigma = T::lit(self.config.exploration_noise);
                let scale = self.actor.scale().clone();
                for (i, v) in a.iter_mut().enumerate() {
                    let eps = T::lit(self.noise_rng.sample(StandardNormal));
                    *v = scale.clip(i, *v + sigma * scale.half_range(i) * eps);
                }
                Ok(a)
            }
            Algo::Sac => {
                let eps = standard_normal(self.act_dim(), 1, &mut self.noise_rng);
                let s = self.actor.sample_inference(&Matrix::column(state), &eps)?;
                Ok(s.actions.into_vec())
            }
        }
    }
}
