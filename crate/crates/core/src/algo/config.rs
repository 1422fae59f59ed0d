use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::replay::{DEFAULT_CAPACITY, MAX_CAPACITY};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    Td3,
    Sac,
}

impl std::str::FromStr for Algo {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "td3" => Ok(Algo::Td3),
            "sac" => Ok(Algo::Sac),
            other => Err(format!("unknown algorithm `{other}` (expected td3 or sac)")),
        }
    }
}

impl std::fmt::Display for Algo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Algo::Td3 => "td3",
            Algo::Sac => "sac",
        })
    }
}

/// SAC temperature handling. `Auto` starts from [`TrainConfig::alpha`] and
/// tunes it toward a target entropy of `-A`; `Fixed` keeps it constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntropyMode {
    #[default]
    Auto,
    Fixed,
}

impl std::str::FromStr for EntropyMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(EntropyMode::Auto),
            "fixed" => Ok(EntropyMode::Fixed),
            other => Err(format!("unknown entropy mode `{other}` (expected auto or fixed)")),
        }
    }
}

impl std::fmt::Display for EntropyMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EntropyMode::Auto => "auto",
            EntropyMode::Fixed => "fixed",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct TrainConfig {
    pub algo: Algo,
    pub gamma: f64,
    pub lr: f64,
    pub tau: f64,
    pub batch: usize,
    pub policy_delay: usize,
    /// Target smoothing noise std as a fraction of the action half-range.
    pub policy_noise: f64,
    pub noise_clip: f64,
    /// TD3 behaviour noise std as a fraction of the action half-range.
    pub exploration_noise: f64,
    pub start_steps: usize,
    pub total_steps: usize,
    pub eval_every: usize,
    pub entropy_mode: EntropyMode,
    /// Initial (auto) or constant (fixed) temperature.
    pub alpha: f64,
    pub critic_hidden: usize,
    pub buffer_capacity: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            algo: Algo::Td3,
            gamma: 0.99,
            lr: 3e-4,
            tau: 5e-3,
            batch: 100,
            policy_delay: 2,
            policy_noise: 0.2,
            noise_clip: 0.5,
            exploration_noise: 0.1,
            start_steps: 1000,
            total_steps: 30_000,
            eval_every: 1000,
            entropy_mode: EntropyMode::Auto,
            alpha: 1.0,
            critic_hidden: crate::nets::DEFAULT_CRITIC_HIDDEN,
            buffer_capacity: DEFAULT_CAPACITY,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(0.0..1.0).contains(&self.gamma) {
            return bad(format!("gamma must lie in [0, 1), got {}", self.gamma));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return bad(format!("tau must lie in (0, 1], got {}", self.tau));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad(format!("lr must be positive, got {}", self.lr));
        }
        for (name, v) in [
            ("batch", self.batch),
            ("policy-delay", self.policy_delay),
            ("total-steps", self.total_steps),
            ("eval-every", self.eval_every),
            ("critic-hidden", self.critic_hidden),
        ] {
            if v == 0 {
                return bad(format!("{name} must be positive"));
            }
        }
        if self.buffer_capacity == 0 || self.buffer_capacity > MAX_CAPACITY {
            return bad(format!("buffer-capacity must be in 1..={MAX_CAPACITY}"));
        }
        for (name, v) in [
            ("policy-noise", self.policy_noise),
            ("noise-clip", self.noise_clip),
            ("exploration-noise", self.exploration_noise),
            ("alpha", self.alpha),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} must be a non-negative number, got {v}"));
            }
        }
        if self.algo == Algo::Sac && self.entropy_mode == EntropyMode::Auto && self.alpha <= 0.0 {
            return bad("automatic entropy tuning needs a positive initial alpha".into());
        }
        Ok(())
    }
}
