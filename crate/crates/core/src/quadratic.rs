//! Quadratic neurons.
//!
//! The production unit computes `y = W_head ((A x) ⊙ (B x)) + b`: two linear
//! projections of the input to `n_f` features, multiplied element-wise and
//! mixed by an affine head with no activation. Every pre-head feature is an
//! exact degree-2 form in `x`.
//!
//! [`ExplicitQuadratic`] is the dense `xᵀ U x` form with upper-triangular
//! `U`, one matrix per feature. It costs `O(N²)` per feature and exists only
//! as a reference for tests.

use crate::error::{Error, Result};
use crate::nets::{ActorKind, ArchitectureConfig, PolicyKind};
use crate::nn::{gemm, init_params, InitKind, InitializerSpec, Matrix, ParamBlock};
use crate::rng;
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
struct QuadCache<T> {
    input: Matrix<T>,
    left: Matrix<T>,
    right: Matrix<T>,
    features: Matrix<T>,
}

/// Factorized quadratic unit with a linear head.
#[derive(Debug, Clone)]
pub struct QuadraticNeuron<T> {
    /// `n_f x N` left projection.
    pub theta_prime: ParamBlock<T>,
    /// `n_f x N` right projection.
    pub theta_double_prime: ParamBlock<T>,
    /// `A x n_f` head weights.
    pub head_weights: ParamBlock<T>,
    /// `A x 1` head bias.
    pub head_bias: ParamBlock<T>,
    cache: Option<QuadCache<T>>,
}

impl<T: Scalar> QuadraticNeuron<T> {
    /// Builds a unit mapping `input_dim -> output_dim` through `n_f` features.
    ///
    /// `factor_init` seeds both projections. With [`InitKind::Zero`] the
    /// projections and head bias start at zero while the head weights are
    /// still drawn from `head_init`; a fully zero unit could never leave zero.
    pub fn new(
        label: &str,
        input_dim: usize,
        n_f: usize,
        output_dim: usize,
        factor_init: InitKind,
        head_init: InitKind,
        seed: u64,
    ) -> Self {
        let spec = |kind, stream| InitializerSpec::new(kind, rng::derive(seed, stream));
        Self {
            theta_prime: ParamBlock::new(
                format!("{label}.theta_prime"),
                init_params(n_f, input_dim, spec(factor_init, 1)),
            ),
            theta_double_prime: ParamBlock::new(
                format!("{label}.theta_double_prime"),
                init_params(n_f, input_dim, spec(factor_init, 2)),
            ),
            head_weights: ParamBlock::new(
                format!("{label}.head_weight"),
                init_params(output_dim, n_f, spec(head_init, 3)),
            ),
            head_bias: ParamBlock::new(format!("{label}.head_bias"), Matrix::zeros(output_dim, 1)),
            cache: None,
        }
    }

    pub fn from_parts(
        theta_prime: Matrix<T>,
        theta_double_prime: Matrix<T>,
        head_weights: Matrix<T>,
        head_bias: Matrix<T>,
    ) -> Result<Self> {
        let (n_f, n) = theta_prime.shape();
        theta_double_prime.expect_shape("quadratic right projection", (n_f, n))?;
        if head_weights.cols() != n_f {
            return Err(Error::dim("quadratic head", format!("Ax{n_f}"), head_weights.shape_string()));
        }
        head_bias.expect_shape("quadratic head bias", (head_weights.rows(), 1))?;
        Ok(Self {
            theta_prime: ParamBlock::new("theta_prime", theta_prime),
            theta_double_prime: ParamBlock::new("theta_double_prime", theta_double_prime),
            head_weights: ParamBlock::new("head_weight", head_weights),
            head_bias: ParamBlock::new("head_bias", head_bias),
            cache: None,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.theta_prime.value.cols()
    }

    pub fn n_features(&self) -> usize {
        self.theta_prime.value.rows()
    }

    pub fn output_dim(&self) -> usize {
        self.head_weights.value.rows()
    }

    fn projections(&self, x: &Matrix<T>) -> Result<(Matrix<T>, Matrix<T>)> {
        if x.rows() != self.input_dim() {
            return Err(Error::dim(
                "quadratic forward",
                format!("{}xB", self.input_dim()),
                x.shape_string(),
            ));
        }
        let mut left = Matrix::zeros(self.n_features(), x.cols());
        let mut right = Matrix::zeros(self.n_features(), x.cols());
        gemm(T::one(), &self.theta_prime.value, false, x, false, T::zero(), &mut left)?;
        gemm(T::one(), &self.theta_double_prime.value, false, x, false, T::zero(), &mut right)?;
        Ok((left, right))
    }

    fn head(&self, features: &Matrix<T>) -> Result<Matrix<T>> {
        let mut y = Matrix::zeros(self.output_dim(), features.cols());
        gemm(T::one(), &self.head_weights.value, false, features, false, T::zero(), &mut y)?;
        y.add_column_broadcast(&self.head_bias.value)?;
        Ok(y)
    }

    /// Pre-head features `(A x) ⊙ (B x)`, `n_f x B`.
    pub fn features(&self, x: &Matrix<T>) -> Result<Matrix<T>> {
        let (left, right) = self.projections(x)?;
        left.zip_map(&right, |a, b| a * b)
    }

    pub fn predict(&self, x: &Matrix<T>) -> Result<Matrix<T>> {
        self.head(&self.features(x)?)
    }

    pub fn forward(&mut self, x: &Matrix<T>) -> Result<Matrix<T>> {
        let (left, right) = self.projections(x)?;
        let features = left.zip_map(&right, |a, b| a * b)?;
        let y = self.head(&features)?;
        self.cache = Some(QuadCache {
            input: x.clone(),
            left,
            right,
            features,
        });
        Ok(y)
    }

    /// Accumulates gradients into all four blocks; returns the input gradient.
    pub fn backward(&mut self, grad_out: &Matrix<T>) -> Result<Matrix<T>> {
        let c = self
            .cache
            .take()
            .ok_or_else(|| Error::State("quadratic backward without a prior forward".into()))?;
        grad_out.expect_shape("quadratic backward", (self.output_dim(), c.input.cols()))?;
        gemm(T::one(), grad_out, false, &c.features, true, T::one(), &mut self.head_weights.grad)?;
        self.head_bias.accumulate(&grad_out.sum_columns())?;

        let mut d_features = Matrix::zeros(self.n_features(), c.input.cols());
        gemm(T::one(), &self.head_weights.value, true, grad_out, false, T::zero(), &mut d_features)?;
        let d_left = d_features.zip_map(&c.right, |g, r| g * r)?;
        let d_right = d_features.zip_map(&c.left, |g, l| g * l)?;
        gemm(T::one(), &d_left, false, &c.input, true, T::one(), &mut self.theta_prime.grad)?;
        gemm(T::one(), &d_right, false, &c.input, true, T::one(), &mut self.theta_double_prime.grad)?;

        let mut dx = Matrix::zeros(self.input_dim(), c.input.cols());
        gemm(T::one(), &self.theta_prime.value, true, &d_left, false, T::zero(), &mut dx)?;
        gemm(T::one(), &self.theta_double_prime.value, true, &d_right, false, T::one(), &mut dx)?;
        Ok(dx)
    }

    pub fn clear_cache(&mut self) {
        self.cache = None;
    }

    pub fn params(&self) -> Vec<&ParamBlock<T>> {
        vec![&self.theta_prime, &self.theta_double_prime, &self.head_weights, &self.head_bias]
    }

    pub fn params_mut(&mut self) -> Vec<&mut ParamBlock<T>> {
        vec![
            &mut self.theta_prime,
            &mut self.theta_double_prime,
            &mut self.head_weights,
            &mut self.head_bias,
        ]
    }
}

/// Dense quadratic forms `y_f = xᵀ U_f x` with upper-triangular `U_f`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitQuadratic<T> {
    theta_hat: Vec<Matrix<T>>,
}

impl<T: Scalar> ExplicitQuadratic<T> {
    /// Validates that every matrix is square, equally sized and upper
    /// triangular.
    pub fn new(theta_hat: Vec<Matrix<T>>) -> Result<Self> {
        let n = theta_hat.first().map_or(0, Matrix::rows);
        for (f, m) in theta_hat.iter().enumerate() {
            m.expect_shape("explicit quadratic feature", (n, n))?;
            for i in 0..n {
                for j in 0..i {
                    if m[(i, j)] != T::zero() {
                        return Err(Error::Validation(format!(
                            "feature {f}: entry ({i}, {j}) below the diagonal is {}",
                            m[(i, j)]
                        )));
                    }
                }
            }
        }
        Ok(Self { theta_hat })
    }

    /// Folds each factorized feature `a_f b_fᵀ` into upper-triangular form:
    /// `U_ii = a_i b_i`, `U_ij = a_i b_j + a_j b_i` for `i < j`.
    pub fn from_factorized(theta_prime: &Matrix<T>, theta_double_prime: &Matrix<T>) -> Result<Self> {
        theta_double_prime.expect_shape("explicit quadratic factors", theta_prime.shape())?;
        let (n_f, n) = theta_prime.shape();
        let mats = (0..n_f)
            .map(|f| {
                let a = theta_prime.row_slice(f);
                let b = theta_double_prime.row_slice(f);
                let mut u = Matrix::zeros(n, n);
                for i in 0..n {
                    u[(i, i)] = a[i] * b[i];
                    for j in i + 1..n {
                        u[(i, j)] = a[i] * b[j] + a[j] * b[i];
                    }
                }
                u
            })
            .collect();
        Self::new(mats)
    }

    pub fn input_dim(&self) -> usize {
        self.theta_hat.first().map_or(0, Matrix::rows)
    }

    pub fn n_features(&self) -> usize {
        self.theta_hat.len()
    }

    pub fn matrices(&self) -> &[Matrix<T>] {
        &self.theta_hat
    }

    /// Evaluates every feature on a single input vector.
    pub fn forward(&self, x: &[T]) -> Result<Vec<T>> {
        let n = self.input_dim();
        if x.len() != n {
            return Err(Error::dim("explicit quadratic forward", n, x.len()));
        }
        Ok(self
            .theta_hat
            .iter()
            .map(|u| {
                let mut y = T::zero();
                for i in 0..n {
                    for j in i..n {
                        y += u[(i, j)] * x[i] * x[j];
                    }
                }
                y
            })
            .collect())
    }
}

/// Feature sizing rule: `n_f = ⌊κ²/2 · N(N+1)⌋`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureSizeSpec {
    pub kappa: f64,
    pub input_dim: usize,
}

impl FeatureSizeSpec {
    pub fn new(kappa: f64, input_dim: usize) -> Self {
        Self { kappa, input_dim }
    }
}

pub fn feature_count(spec: FeatureSizeSpec) -> Result<usize> {
    let FeatureSizeSpec { kappa, input_dim } = spec;
    if !(kappa > 0.0 && kappa <= 1.0) {
        return Err(Error::Config(format!("kappa must lie in (0, 1], got {kappa}")));
    }
    if input_dim == 0 {
        return Err(Error::Config("input dimension must be positive".into()));
    }
    let n = input_dim as f64;
    let raw = kappa * kappa / 2.0 * n * (n + 1.0);
    // The product is formed in f64; nudge values that land a few ulps below
    // an integer (e.g. 0.1² rounding) back onto it before truncating.
    let n_f = (raw * (1.0 + 4.0 * f64::EPSILON)).trunc() as usize;
    if n_f == 0 {
        return Err(Error::Config(format!(
            "kappa {kappa} with input dimension {input_dim} yields zero quadratic features; choose a larger kappa"
        )));
    }
    Ok(n_f)
}

/// Weight count of the explicit form: `N(N+1)/2 · n_f`.
pub fn explicit_param_count(input_dim: usize, n_f: usize) -> usize {
    input_dim * (input_dim + 1) / 2 * n_f
}

fn dense_count(input: usize, output: usize, bias: bool) -> usize {
    input * output + if bias { output } else { 0 }
}

/// Exact trainable-scalar count of the actor described by `arch`.
///
/// Gaussian policies emit mean and log-std, so the trunk output layer and
/// every shortcut unit are twice as wide.
pub fn count_parameters(arch: &ArchitectureConfig, obs_dim: usize, act_dim: usize) -> Result<usize> {
    let out = match arch.policy_kind {
        PolicyKind::Deterministic => act_dim,
        PolicyKind::Gaussian => 2 * act_dim,
    };
    let h = arch.n_h;
    let mut total = dense_count(obs_dim, h, true) + dense_count(h, h, true) + dense_count(h, out, true);
    if matches!(arch.actor_kind, ActorKind::Lmlp | ActorKind::Lqmlp) {
        total += dense_count(obs_dim, out, false);
    }
    if let Some(n_f) = arch.resolve_n_f(obs_dim)? {
        total += 2 * obs_dim * n_f + dense_count(n_f, out, true);
    }
    Ok(total)
}

/// Renders a count in the `12.3k` style, rounded half-up to 0.1k.
pub fn format_thousands(count: usize) -> String {
    let tenths = (count + 50) / 100;
    format!("{}.{}k", tenths / 10, tenths % 10)
}
