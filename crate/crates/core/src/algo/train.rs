use rand::Rng as _;

use crate::algo::Agent;
use crate::envs::Environment;
use crate::error::{Error, Result};
use crate::replay::{ReplayBuffer, Transition};
use crate::rng::{self, streams};
use crate::scalar::Scalar;

/// Evaluation results keyed by environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainLog<R> {
    pub evals: Vec<(u64, R)>,
    pub updates: u64,
    pub episodes: u64,
}

/// Steps at which [`train`] evaluates: every multiple of `eval_every` plus
/// the final step.
pub fn eval_schedule(total_steps: usize, eval_every: usize) -> Vec<u64> {
    let mut steps: Vec<u64> = (1..=total_steps / eval_every).map(|k| (k * eval_every) as u64).collect();
    if total_steps % eval_every != 0 {
        steps.push(total_steps as u64);
    }
    steps
}

/// Runs `agent` on `env` for `total_steps` environment steps.
///
/// The first `start_steps` actions are uniform over the action box; after
/// that each step takes one exploratory action and one gradient update.
/// `eval` sees the agent at every step of [`eval_schedule`]. Everything is a
/// function of `seed`, so identical inputs give identical logs.
pub fn train<T: Scalar, R>(
    agent: &mut Agent<T>,
    env: &mut dyn Environment,
    seed: u64,
    mut eval: impl FnMut(u64, &Agent<T>) -> Result<R>,
) -> Result<TrainLog<R>> {
    let cfg = agent.config.clone();
    let spec = env.spec().clone();
    if spec.obs_dim != agent.actor.obs_dim() || spec.act_dim != agent.act_dim() {
        return Err(Error::dim(
            "train",
            format!("{}/{}", agent.actor.obs_dim(), agent.act_dim()),
            format!("{}/{} for {}", spec.obs_dim, spec.act_dim, spec.name),
        ));
    }
    let mut buffer = ReplayBuffer::new(spec.obs_dim, spec.act_dim, cfg.buffer_capacity)?;
    let mut explore_rng = rng::stream(seed, streams::EXPLORATION);
    let mut replay_rng = rng::stream(seed, streams::REPLAY);
    let reset_base = rng::derive(seed, streams::TRAIN_RESET);
    let schedule = eval_schedule(cfg.total_steps, cfg.eval_every);
    let mut next_eval = schedule.iter().copied().peekable();

    let to_t = |v: &[f64]| v.iter().map(|&x| T::lit(x)).collect::<Vec<T>>();
    let mut episodes = 0u64;
    let mut obs = to_t(&env.reset(rng::derive(reset_base, episodes)));
    let mut log = TrainLog {
        evals: Vec::with_capacity(schedule.len()),
        updates: 0,
        episodes: 0,
    };
    for t in 1..=cfg.total_steps as u64 {
        let action: Vec<T> = if t <= cfg.start_steps as u64 {
            (0..spec.act_dim)
                .map(|i| T::lit(explore_rng.random_range(spec.action_low[i]..=spec.action_high[i])))
                .collect()
        } else {
            agent.explore(&obs).map_err(|e| e.at_step(t))?
        };
        let env_action: Vec<f64> = action.iter().map(|v| v.as_f64()).collect();
        let step = env.step(&env_action).map_err(|e| e.at_step(t))?;
        let next = to_t(&step.next_obs);
        buffer.push(Transition {
            s: std::mem::replace(&mut obs, next.clone()),
            a: action,
            r: T::lit(step.reward),
            s_next: next,
            done_mask: if step.done { T::one() } else { T::zero() },
        })?;
        if step.done || step.truncated {
            episodes += 1;
            obs = to_t(&env.reset(rng::derive(reset_base, episodes)));
        }
        if t > cfg.start_steps as u64 {
            let batch = buffer.sample(cfg.batch, &mut replay_rng)?;
            agent.update(&batch).map_err(|e| e.at_step(t))?;
            log.updates += 1;
        }
        if next_eval.peek() == Some(&t) {
            next_eval.next();
            log.evals.push((t, eval(t, agent)?));
        }
    }
    log.episodes = episodes;
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algo::{Algo, TrainConfig};
    use crate::envs::make_env;
    use crate::nets::{ActionScale, ArchitectureConfig, PolicyKind};

    fn setup(algo: Algo, total: usize) -> (Agent<f64>, Box<dyn Environment>) {
        let env = make_env("pendulum").unwrap();
        let spec = env.spec().clone();
        let kind = match algo {
            Algo::Td3 => PolicyKind::Deterministic,
            Algo::Sac => PolicyKind::Gaussian,
        };
        let cfg = TrainConfig {
            algo,
            total_steps: total,
            start_steps: 200,
            eval_every: 150,
            batch: 32,
            critic_hidden: 16,
            ..Default::default()
        };
        let scale = ActionScale::new(spec.action_low.clone(), spec.action_high.clone()).unwrap();
        let agent = Agent::new(&ArchitectureConfig::mlp(8, kind), &cfg, spec.obs_dim, scale, 3).unwrap();
        (agent, env)
    }

    fn fingerprint(a: &Agent<f64>) -> Vec<f64> {
        a.actor.params().iter().flat_map(|p| p.value.as_slice().to_vec()).collect()
    }

    #[test]
    fn schedule_includes_final_step() {
        assert_eq!(eval_schedule(3000, 1000), vec![1000, 2000, 3000]);
        assert_eq!(eval_schedule(2500, 1000), vec![1000, 2000, 2500]);
    }

    #[test]
    fn warmup_only_run_performs_no_updates() {
        let (mut agent, mut env) = setup(Algo::Td3, 200);
        let initial = fingerprint(&agent);
        let log = train(&mut agent, env.as_mut(), 0, |_, a| Ok(fingerprint(a))).unwrap();
        assert_eq!(log.updates, 0);
        assert_eq!(agent.updates(), 0);
        assert_eq!(log.evals.len(), 2);
        assert!(log.evals.iter().all(|(_, f)| *f == initial));
    }

    #[test]
    fn identical_seeds_give_identical_runs() {
        for algo in [Algo::Td3, Algo::Sac] {
            let run = || {
                let (mut agent, mut env) = setup(algo, 400);
                train(&mut agent, env.as_mut(), 5, |_, a| Ok(fingerprint(a))).unwrap()
            };
            let (a, b) = (run(), run());
            assert_eq!(a.updates, 200);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn numeric_faults_carry_the_step() {
        let (mut agent, mut env) = setup(Algo::Td3, 400);
        for p in agent.critic.params_mut() {
            p.value.fill(f64::INFINITY);
        }
        let err = train(&mut agent, env.as_mut(), 0, |_, _| Ok(())).unwrap_err();
        assert!(err.is_numeric());
        assert!(err.to_string().contains("step 201"), "{err}");
    }
}
