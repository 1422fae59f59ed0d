//! Actor networks.
//!
//! Every topology shares one MLP trunk (`N -> n_h -> n_h -> out`, ReLU hidden
//! layers, identity output). Optional shortcut units read the raw state and
//! add their output to the trunk's before the single final `tanh`:
//!
//! ```text
//! z = trunk(s) + quadratic(s) + linear(s)
//! a = center + half_range * tanh(z)
//! ```
//!
//! A Gaussian policy doubles `out`: rows `0..A` of `z` are the mean and rows
//! `A..2A` the log standard deviation, which bypasses the `tanh`.

use crate::error::{Error, Result};
use crate::nets::{ArchitectureConfig, PolicyKind};
use crate::nn::{Activation, DenseLayer, InitKind, InitializerSpec, Matrix, ParamBlock};
use crate::quadratic::QuadraticNeuron;
use crate::rng;
use crate::scalar::Scalar;

pub const LOG_STD_MIN: f64 = -20.0;
pub const LOG_STD_MAX: f64 = 2.0;

/// Per-dimension affine map from `(-1, 1)` onto `[low, high]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionScale<T> {
    pub low: Vec<T>,
    pub high: Vec<T>,
}

impl<T: Scalar> ActionScale<T> {
    pub fn new(low: Vec<T>, high: Vec<T>) -> Result<Self> {
        if low.len() != high.len() {
            return Err(Error::dim("action bounds", low.len(), high.len()));
        }
        if low.iter().zip(&high).any(|(l, h)| !(l < h)) {
            return Err(Error::Config("action bounds need low < high in every dimension".into()));
        }
        Ok(Self { low, high })
    }

    pub fn symmetric(dim: usize, limit: T) -> Self {
        Self {
            low: vec![-limit; dim],
            high: vec![limit; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.low.len()
    }

    pub fn half_range(&self, i: usize) -> T {
        (self.high[i] - self.low[i]) / T::lit(2.0)
    }

    pub fn center(&self, i: usize) -> T {
        (self.high[i] + self.low[i]) / T::lit(2.0)
    }

    /// Maps a squashed value in `(-1, 1)` to the environment range.
    pub fn apply(&self, i: usize, squashed: T) -> T {
        self.center(i) + self.half_range(i) * squashed
    }

    pub fn clip(&self, i: usize, a: T) -> T {
        a.max(self.low[i]).min(self.high[i])
    }
}

/// Output of the reparameterized squashed-Gaussian sampler.
#[derive(Debug, Clone)]
pub struct SquashedSample<T> {
    /// Environment-scale actions, `A x B`.
    pub actions: Matrix<T>,
    /// `log π(a|s)` of the squashed sample (tanh space), `1 x B`.
    pub log_prob: Matrix<T>,
}

#[derive(Debug, Clone)]
enum HeadCache<T> {
    Deterministic {
        squashed: Matrix<T>,
    },
    Gaussian {
        squashed: Matrix<T>,
        noise: Matrix<T>,
        std: Matrix<T>,
        log_std_in_range: Vec<bool>,
    },
}

#[derive(Debug, Clone)]
pub struct Actor<T> {
    config: ArchitectureConfig,
    obs_dim: usize,
    act_dim: usize,
    trunk: [DenseLayer<T>; 3],
    quad: Option<QuadraticNeuron<T>>,
    linear: Option<DenseLayer<T>>,
    scale: ActionScale<T>,
    head_cache: Option<HeadCache<T>>,
}

impl<T: Scalar> Actor<T> {
    /// Assembles the actor described by `config`.
    ///
    /// Trunk weights, quadratic unit and linear shortcut draw from separate
    /// streams of `seed`, so two kinds built from one seed share an identical
    /// trunk.
    pub fn build(
        config: &ArchitectureConfig,
        obs_dim: usize,
        scale: ActionScale<T>,
        seed: u64,
    ) -> Result<Self> {
        let act_dim = scale.dim();
        if obs_dim == 0 || act_dim == 0 {
            return Err(Error::Config("observation and action dimensions must be positive".into()));
        }
        let n_f = config.resolve_n_f(obs_dim)?;
        let out = output_width(config.policy_kind, act_dim);
        let h = config.n_h;
        let xavier = |stream| InitializerSpec::new(InitKind::XavierUniform, rng::derive(seed, stream));
        let trunk = [
            DenseLayer::new("actor.trunk.0", obs_dim, h, Activation::Relu, xavier(0), true),
            DenseLayer::new("actor.trunk.1", h, h, Activation::Relu, xavier(1), true),
            DenseLayer::new("actor.trunk.2", h, out, Activation::Identity, xavier(2), true),
        ];
        let quad = n_f.map(|n_f| {
            QuadraticNeuron::new(
                "actor.quad",
                obs_dim,
                n_f,
                out,
                config.quad_init,
                InitKind::XavierUniform,
                rng::derive(seed, 10),
            )
        });
        let linear = config.actor_kind.has_linear().then(|| {
            DenseLayer::new("actor.linear", obs_dim, out, Activation::Identity, xavier(11), false)
        });
        Ok(Self {
            config: config.clone(),
            obs_dim,
            act_dim,
            trunk,
            quad,
            linear,
            scale,
            head_cache: None,
        })
    }

    pub fn config(&self) -> &ArchitectureConfig {
        &self.config
    }

    pub fn obs_dim(&self) -> usize {
        self.obs_dim
    }

    pub fn act_dim(&self) -> usize {
        self.act_dim
    }

    pub fn policy_kind(&self) -> PolicyKind {
        self.config.policy_kind
    }

    pub fn scale(&self) -> &ActionScale<T> {
        &self.scale
    }

    pub fn trunk(&self) -> &[DenseLayer<T>; 3] {
        &self.trunk
    }

    pub fn trunk_mut(&mut self) -> &mut [DenseLayer<T>; 3] {
        &mut self.trunk
    }

    pub fn quadratic(&self) -> Option<&QuadraticNeuron<T>> {
        self.quad.as_ref()
    }

    pub fn quadratic_mut(&mut self) -> Option<&mut QuadraticNeuron<T>> {
        self.quad.as_mut()
    }

    pub fn linear(&self) -> Option<&DenseLayer<T>> {
        self.linear.as_ref()
    }

    pub fn linear_mut(&mut self) -> Option<&mut DenseLayer<T>> {
        self.linear.as_mut()
    }

    pub fn output_width(&self) -> usize {
        output_width(self.config.policy_kind, self.act_dim)
    }

    fn check_input(&self, states: &Matrix<T>) -> Result<()> {
        if states.rows() != self.obs_dim {
            return Err(Error::dim(
                "actor input",
                format!("{}xB", self.obs_dim),
                states.shape_string(),
            ));
        }
        Ok(())
    }

    /// Summed unit outputs before the squash, without caching.
    pub fn pre_activation(&self, states: &Matrix<T>) -> Result<Matrix<T>> {
        self.check_input(states)?;
        let mut z = self.trunk[0].predict(states)?;
        z = self.trunk[1].predict(&z)?;
        z = self.trunk[2].predict(&z)?;
        if let Some(q) = &self.quad {
            z.add_assign(&q.predict(states)?)?;
        }
        if let Some(l) = &self.linear {
            z.add_assign(&l.predict(states)?)?;
        }
        Ok(z)
    }

    fn pre_activation_forward(&mut self, states: &Matrix<T>) -> Result<Matrix<T>> {
        self.check_input(states)?;
        let mut z = self.trunk[0].forward(states)?;
        z = self.trunk[1].forward(&z)?;
        z = self.trunk[2].forward(&z)?;
        if let Some(q) = &mut self.quad {
            z.add_assign(&q.forward(states)?)?;
        }
        if let Some(l) = &mut self.linear {
            z.add_assign(&l.forward(states)?)?;
        }
        Ok(z)
    }

    /// Routes the pre-activation gradient into every unit; returns the state
    /// gradient.
    fn pre_activation_backward(&mut self, dz: &Matrix<T>) -> Result<Matrix<T>> {
        let mut g = self.trunk[2].backward(dz)?;
        g = self.trunk[1].backward(&g)?;
        let mut ds = self.trunk[0].backward(&g)?;
        if let Some(q) = &mut self.quad {
            ds.add_assign(&q.backward(dz)?)?;
        }
        if let Some(l) = &mut self.linear {
            ds.add_assign(&l.backward(dz)?)?;
        }
        Ok(ds)
    }

    fn squash_rows(&self, z: &Matrix<T>) -> Matrix<T> {
        let b = z.cols();
        let mut a = Matrix::zeros(self.act_dim, b);
        for i in 0..self.act_dim {
            for j in 0..b {
                a[(i, j)] = self.scale.apply(i, z[(i, j)].tanh());
            }
        }
        a
    }

    /// Deterministic actions for a batch of states. Gaussian policies return
    /// the squashed mean.
    pub fn act_batch(&self, states: &Matrix<T>) -> Result<Matrix<T>> {
        let z = self.pre_activation(states)?;
        Ok(self.squash_rows(&z))
    }

    pub fn act(&self, state: &[T]) -> Result<Vec<T>> {
        Ok(self.act_batch(&Matrix::column(state))?.into_vec())
    }

    /// Cached deterministic forward pass for training.
    pub fn forward_deterministic(&mut self, states: &Matrix<T>) -> Result<Matrix<T>> {
        if self.config.policy_kind != PolicyKind::Deterministic {
            return Err(Error::Config("deterministic forward on a gaussian actor".into()));
        }
        let z = self.pre_activation_forward(states)?;
        let squashed = z.map(|v| v.tanh());
        let actions = self.squash_rows(&z);
        self.head_cache = Some(HeadCache::Deterministic { squashed });
        Ok(actions)
    }

    /// Accumulates gradients given `dL/da` for environment-scale actions.
    pub fn backward_deterministic(&mut self, d_actions: &Matrix<T>) -> Result<Matrix<T>> {
        let squashed = match self.head_cache.take() {
            Some(HeadCache::Deterministic { squashed }) => squashed,
            _ => return Err(Error::State("deterministic backward without a matching forward".into())),
        };
        d_actions.expect_shape("actor backward", squashed.shape())?;
        let mut dz = Matrix::zeros(self.act_dim, squashed.cols());
        for i in 0..self.act_dim {
            let half = self.scale.half_range(i);
            for j in 0..squashed.cols() {
                let y = squashed[(i, j)];
                dz[(i, j)] = d_actions[(i, j)] * half * (T::one() - y * y);
            }
        }
        self.pre_activation_backward(&dz)
    }

    /// Splits a `2A x B` pre-activation into mean and clamped log-std.
    pub fn gaussian_head(&self, z: &Matrix<T>) -> Result<(Matrix<T>, Matrix<T>)> {
        if self.config.policy_kind != PolicyKind::Gaussian {
            return Err(Error::Config("gaussian head on a deterministic actor".into()));
        }
        let a = self.act_dim;
        let mean = z.row_range(0, a);
        let log_std = z
            .row_range(a, 2 * a)
            .map(|v| v.max(T::lit(LOG_STD_MIN)).min(T::lit(LOG_STD_MAX)));
        Ok((mean, log_std))
    }

    /// Mean and clamped log-std for a batch of states.
    pub fn gaussian(&self, states: &Matrix<T>) -> Result<(Matrix<T>, Matrix<T>)> {
        let z = self.pre_activation(states)?;
        self.gaussian_head(&z)
    }

    /// Reparameterized sample `a = scale(tanh(μ + σ ε))` with its log-density.
    ///
    /// `noise` holds the standard-normal draws `ε` (`A x B`). The pass is
    /// cached for [`Actor::backward_gaussian`].
    pub fn sample(&mut self, states: &Matrix<T>, noise: &Matrix<T>) -> Result<SquashedSample<T>> {
        let z = self.pre_activation_forward(states)?;
        let (sample, head) = gaussian_sample(self, &z, noise)?;
        self.head_cache = Some(head);
        Ok(sample)
    }

    /// Same as [`Actor::sample`] without caching.
    pub fn sample_inference(&self, states: &Matrix<T>, noise: &Matrix<T>) -> Result<SquashedSample<T>> {
        let z = self.pre_activation(states)?;
        gaussian_sample(self, &z, noise).map(|(sample, _)| sample)
    }

    /// Accumulates gradients of `L` given `dL/da` (environment scale, `A x B`)
    /// and `dL/dlog π` (`1 x B`) for the cached sample.
    pub fn backward_gaussian(&mut self, d_actions: &Matrix<T>, d_log_prob: &Matrix<T>) -> Result<Matrix<T>> {
        let (squashed, noise, std, in_range) = match self.head_cache.take() {
            Some(HeadCache::Gaussian {
                squashed,
                noise,
                std,
                log_std_in_range,
            }) => (squashed, noise, std, log_std_in_range),
            _ => return Err(Error::State("gaussian backward without a matching sample".into())),
        };
        let a = self.act_dim;
        let b = squashed.cols();
        d_actions.expect_shape("gaussian backward actions", (a, b))?;
        d_log_prob.expect_shape("gaussian backward log-prob", (1, b))?;
        let two = T::lit(2.0);
        let mut dz = Matrix::zeros(2 * a, b);
        for i in 0..a {
            let half = self.scale.half_range(i);
            for j in 0..b {
                let y = squashed[(i, j)];
                let gl = d_log_prob[(0, j)];
                // d log π / du = 2 tanh(u) from the squash correction.
                let du = d_actions[(i, j)] * half * (T::one() - y * y) + gl * two * y;
                dz[(i, j)] = du;
                let d_log_std = du * noise[(i, j)] * std[(i, j)] - gl;
                dz[(a + i, j)] = if in_range[i * b + j] { d_log_std } else { T::zero() };
            }
        }
        self.pre_activation_backward(&dz)
    }

    pub fn clear_cache(&mut self) {
        self.head_cache = None;
        self.trunk.iter_mut().for_each(DenseLayer::clear_cache);
        if let Some(q) = &mut self.quad {
            q.clear_cache();
        }
        if let Some(l) = &mut self.linear {
            l.clear_cache();
        }
    }

    pub fn params(&self) -> Vec<&ParamBlock<T>> {
        let mut out: Vec<&ParamBlock<T>> = self.trunk.iter().flat_map(DenseLayer::params).collect();
        if let Some(q) = &self.quad {
            out.extend(q.params());
        }
        if let Some(l) = &self.linear {
            out.extend(l.params());
        }
        out
    }

    pub fn params_mut(&mut self) -> Vec<&mut ParamBlock<T>> {
        let mut out: Vec<&mut ParamBlock<T>> =
            self.trunk.iter_mut().flat_map(DenseLayer::params_mut).collect();
        if let Some(q) = &mut self.quad {
            out.extend(q.params_mut());
        }
        if let Some(l) = &mut self.linear {
            out.extend(l.params_mut());
        }
        out
    }

    pub fn parameter_count(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }

    pub fn zero_grads(&mut self) {
        self.params_mut().into_iter().for_each(ParamBlock::zero_grad);
    }
}

fn output_width(kind: PolicyKind, act_dim: usize) -> usize {
    match kind {
        PolicyKind::Deterministic => act_dim,
        PolicyKind::Gaussian => 2 * act_dim,
    }
}

/// `ln(1 + e^x)` without overflow.
fn softplus<T: Scalar>(x: T) -> T {
    x.max(T::zero()) + (-x.abs()).exp().ln_1p()
}

fn gaussian_sample<T: Scalar>(
    actor: &Actor<T>,
    z: &Matrix<T>,
    noise: &Matrix<T>,
) -> Result<(SquashedSample<T>, HeadCache<T>)> {
    let a = actor.act_dim;
    let b = z.cols();
    noise.expect_shape("gaussian noise", (a, b))?;
    let (mean, log_std) = actor.gaussian_head(z)?;
    let lo = T::lit(LOG_STD_MIN);
    let hi = T::lit(LOG_STD_MAX);
    let half_ln_2pi = T::lit(0.5 * (2.0 * std::f64::consts::PI).ln());
    let ln2 = T::lit(std::f64::consts::LN_2);
    let two = T::lit(2.0);
    let half = T::lit(0.5);

    let mut squashed = Matrix::zeros(a, b);
    let mut std = Matrix::zeros(a, b);
    let mut actions = Matrix::zeros(a, b);
    let mut log_prob = Matrix::zeros(1, b);
    let mut in_range = vec![false; a * b];
    for i in 0..a {
        for j in 0..b {
            let raw = z[(a + i, j)];
            in_range[i * b + j] = raw >= lo && raw <= hi;
            let ls = log_std[(i, j)];
            let s = ls.exp();
            let eps = noise[(i, j)];
            let u = mean[(i, j)] + s * eps;
            let y = u.tanh();
            squashed[(i, j)] = y;
            std[(i, j)] = s;
            actions[(i, j)] = actor.scale.apply(i, y);
            // Gaussian log-density minus log|d tanh(u)/du|, the latter in the
            // stable form 2 (ln 2 - u - softplus(-2u)).
            log_prob[(0, j)] += -half * eps * eps - ls - half_ln_2pi - two * (ln2 - u - softplus(-two * u));
        }
    }
    let head = HeadCache::Gaussian {
        squashed,
        noise: noise.clone(),
        std,
        log_std_in_range: in_range,
    };
    Ok((SquashedSample { actions, log_prob }, head))
}
