use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::InitKind;
use crate::quadratic::{feature_count, FeatureSizeSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActorKind {
    /// Plain two-hidden-layer MLP.
    Mlp,
    /// MLP plus a quadratic shortcut from input to output.
    Qmlp,
    /// MLP plus a linear shortcut.
    Lmlp,
    /// MLP plus both shortcuts.
    Lqmlp,
}

impl ActorKind {
    pub fn has_quadratic(self) -> bool {
        matches!(self, ActorKind::Qmlp | ActorKind::Lqmlp)
    }

    pub fn has_linear(self) -> bool {
        matches!(self, ActorKind::Lmlp | ActorKind::Lqmlp)
    }

    pub fn name(self) -> &'static str {
        match self {
            ActorKind::Mlp => "mlp",
            ActorKind::Qmlp => "qmlp",
            ActorKind::Lmlp => "lmlp",
            ActorKind::Lqmlp => "lqmlp",
        }
    }
}

impl std::str::FromStr for ActorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "").as_str() {
            "mlp" => Ok(ActorKind::Mlp),
            "qmlp" => Ok(ActorKind::Qmlp),
            "lmlp" => Ok(ActorKind::Lmlp),
            "lqmlp" => Ok(ActorKind::Lqmlp),
            other => Err(format!("unknown actor `{other}` (expected mlp, qmlp, lmlp or lqmlp)")),
        }
    }
}

impl std::fmt::Display for ActorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    Deterministic,
    Gaussian,
}

impl std::str::FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "deterministic" => Ok(PolicyKind::Deterministic),
            "gaussian" | "stochastic" => Ok(PolicyKind::Gaussian),
            other => Err(format!("unknown policy kind `{other}` (expected deterministic or gaussian)")),
        }
    }
}

/// Shape of an actor network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchitectureConfig {
    pub actor_kind: ActorKind,
    /// Width of both hidden layers of the MLP trunk.
    pub n_h: usize,
    pub kappa: Option<f64>,
    /// Explicit quadratic feature count; mutually exclusive with `kappa`.
    pub n_f: Option<usize>,
    pub quad_init: InitKind,
    pub policy_kind: PolicyKind,
}

impl ArchitectureConfig {
    pub fn mlp(n_h: usize, policy_kind: PolicyKind) -> Self {
        Self {
            actor_kind: ActorKind::Mlp,
            n_h,
            kappa: None,
            n_f: None,
            quad_init: InitKind::KaimingUniform,
            policy_kind,
        }
    }

    pub fn with_kind(mut self, kind: ActorKind) -> Self {
        self.actor_kind = kind;
        self
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = Some(kappa);
        self.n_f = None;
        self
    }

    pub fn with_n_f(mut self, n_f: usize) -> Self {
        self.n_f = Some(n_f);
        self.kappa = None;
        self
    }

    pub fn with_quad_init(mut self, init: InitKind) -> Self {
        self.quad_init = init;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_h == 0 {
            return Err(Error::Config("n_h must be positive".into()));
        }
        if self.actor_kind.has_quadratic() {
            match (self.kappa, self.n_f) {
                (Some(_), Some(_)) => {
                    return Err(Error::Config(format!(
                        "{} actor takes either kappa or n_f, not both",
                        self.actor_kind
                    )))
                }
                (None, None) => {
                    return Err(Error::Config(format!(
                        "{} actor requires kappa or n_f",
                        self.actor_kind
                    )))
                }
                (_, Some(0)) => return Err(Error::Config("n_f must be positive".into())),
                _ => {}
            }
        }
        Ok(())
    }

    /// Quadratic feature count for an input of width `obs_dim`, or `None` for
    /// kinds without a quadratic unit.
    pub fn resolve_n_f(&self, obs_dim: usize) -> Result<Option<usize>> {
        self.validate()?;
        if !self.actor_kind.has_quadratic() {
            return Ok(None);
        }
        match (self.kappa, self.n_f) {
            (_, Some(n_f)) => Ok(Some(n_f)),
            (Some(kappa), None) => feature_count(FeatureSizeSpec::new(kappa, obs_dim)).map(Some),
            (None, None) => unreachable!("validated"),
        }
    }
}
