use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::nn::Matrix;
use crate::rng;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    KaimingUniform,
    XavierUniform,
    Zero,
}

impl InitKind {
    pub fn name(self) -> &'static str {
        match self {
            InitKind::KaimingUniform => "kaiming_uniform",
            InitKind::XavierUniform => "xavier_uniform",
            InitKind::Zero => "zero",
        }
    }
}

impl std::str::FromStr for InitKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('-', "_").as_str() {
            "kaiming_uniform" | "kaiming" => Ok(InitKind::KaimingUniform),
            "xavier_uniform" | "xavier" => Ok(InitKind::XavierUniform),
            "zero" | "zeros" => Ok(InitKind::Zero),
            other => Err(format!(
                "unknown initializer `{other}` (expected kaiming_uniform, xavier_uniform or zero)"
            )),
        }
    }
}

impl std::fmt::Display for InitKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InitializerSpec {
    pub kind: InitKind,
    pub seed: u64,
}

impl InitializerSpec {
    pub fn new(kind: InitKind, seed: u64) -> Self {
        Self { kind, seed }
    }

    /// Half-width of the uniform sampling interval for a `rows x cols`
    /// weight matrix (`fan_in = cols`, `fan_out = rows`).
    pub fn bound(&self, rows: usize, cols: usize) -> f64 {
        match self.kind {
            InitKind::KaimingUniform => (6.0 / cols as f64).sqrt(),
            InitKind::XavierUniform => (6.0 / (cols + rows) as f64).sqrt(),
            InitKind::Zero => 0.0,
        }
    }
}

/// Samples a `rows x cols` weight matrix. Values are drawn as `f64` from the
/// spec's seeded stream and then converted, so `f32` and `f64` networks built
/// from one seed agree up to rounding.
pub fn init_params<T: Scalar>(rows: usize, cols: usize, spec: InitializerSpec) -> Matrix<T> {
    if spec.kind == InitKind::Zero {
        return Matrix::zeros(rows, cols);
    }
    let bound = spec.bound(rows, cols);
    let mut rng = rng::rng_from(spec.seed);
    let data = (0..rows * cols)
        .map(|_| T::lit(rng.random_range(-bound..=bound)))
        .collect();
    Matrix::from_vec(rows, cols, data).expect("length matches shape")
}
