//! Experiment configuration.
//!
//! Config files are flat TOML: one `key = value` per line, keys in
//! kebab-case and identical to the CLI flag names.
//!
//! ```toml
//! env = "pendulum"
//! algo = "td3"
//! actor = "qmlp"
//! kappa = 1.0
//! steps = 30000
//! seeds = [0, 1, 2, 3, 4]
//! ```
//!
//! Layers merge with the precedence flag > file > default.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::algo::{Algo, EntropyMode, TrainConfig};
use crate::envs::noise::NoiseMode;
use crate::envs::ENV_NAMES;
use crate::error::{Error, Result};
use crate::nets::{ActorKind, ArchitectureConfig, PolicyKind};
use crate::nn::InitKind;

pub const DEFAULT_SEEDS: [u64; 5] = [0, 1, 2, 3, 4];
pub const DEFAULT_N_H: usize = 64;
pub const DEFAULT_EVAL_EPISODES: usize = 10;
pub const REFERENCE_EVAL_EVERY: usize = 5000;

/// Every configurable key, each optional so layers can be merged.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct PartialConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub env: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub algo: Option<Algo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub actor: Option<ActorKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_h: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_f: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quad_init: Option<InitKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batch: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub policy_delay: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub policy_noise: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_clip: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exploration_noise: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start_steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eval_every: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eval_episodes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entropy_mode: Option<EntropyMode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub critic_hidden: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub buffer_capacity: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub smoothing_window: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checkpoint_every: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_mode: Option<NoiseMode>,
}

macro_rules! overlay_fields {
    ($base:ident, $over:ident; $($field:ident),*) => {
        PartialConfig { $($field: $over.$field.or($base.$field)),* }
    };
}

impl PartialConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("flat config serializes")
    }

    /// Fields set in `over` win. `kappa` and `n-f` size the same unit, so
    /// setting either in `over` clears both from `self`.
    pub fn overlay(self, over: PartialConfig) -> PartialConfig {
        let mut base = self;
        if over.kappa.is_some() || over.n_f.is_some() {
            base.kappa = None;
            base.n_f = None;
        }
        overlay_fields!(base, over;
            env, algo, actor, n_h, kappa, n_f, quad_init, gamma, lr, tau, batch,
            policy_delay, policy_noise, noise_clip, exploration_noise, start_steps,
            steps, eval_every, eval_episodes, entropy_mode, alpha, critic_hidden,
            buffer_capacity, seeds, smoothing_window, checkpoint_every, noise_mode)
    }
}

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub env: String,
    pub arch: ArchitectureConfig,
    pub train: TrainConfig,
    pub seeds: Vec<u64>,
    pub eval_episodes: usize,
    pub smoothing_window: usize,
    /// Periodic checkpoint interval in steps; 0 keeps only the best.
    pub checkpoint_every: usize,
    pub noise_mode: NoiseMode,
}

impl ExperimentConfig {
    /// Fills unset keys with defaults. `env`, `algo` and `actor` have none.
    pub fn resolve(p: &PartialConfig) -> Result<Self> {
        let missing = |k: &str| Error::Config(format!("missing required setting `{k}`"));
        let env = p.env.clone().ok_or_else(|| missing("env"))?;
        let algo = p.algo.ok_or_else(|| missing("algo"))?;
        let actor = p.actor.ok_or_else(|| missing("actor"))?;
        let policy_kind = match algo {
            Algo::Td3 => PolicyKind::Deterministic,
            Algo::Sac => PolicyKind::Gaussian,
        };
        let mut arch = ArchitectureConfig::mlp(p.n_h.unwrap_or(DEFAULT_N_H), policy_kind).with_kind(actor);
        arch.kappa = p.kappa;
        arch.n_f = p.n_f;
        if let Some(init) = p.quad_init {
            arch.quad_init = init;
        }
        let d = TrainConfig::default();
        let train = TrainConfig {
            algo,
            gamma: p.gamma.unwrap_or(d.gamma),
            lr: p.lr.unwrap_or(d.lr),
            tau: p.tau.unwrap_or(d.tau),
            batch: p.batch.unwrap_or(d.batch),
            policy_delay: p.policy_delay.unwrap_or(d.policy_delay),
            policy_noise: p.policy_noise.unwrap_or(d.policy_noise),
            noise_clip: p.noise_clip.unwrap_or(d.noise_clip),
            exploration_noise: p.exploration_noise.unwrap_or(d.exploration_noise),
            start_steps: p.start_steps.unwrap_or(d.start_steps),
            total_steps: p.steps.unwrap_or(d.total_steps),
            eval_every: p.eval_every.unwrap_or(d.eval_every),
            entropy_mode: p.entropy_mode.unwrap_or(d.entropy_mode),
            alpha: p.alpha.unwrap_or(d.alpha),
            critic_hidden: p.critic_hidden.unwrap_or(d.critic_hidden),
            buffer_capacity: p.buffer_capacity.unwrap_or(d.buffer_capacity),
        };
        let cfg = Self {
            env,
            arch,
            train,
            seeds: p.seeds.clone().unwrap_or_else(|| DEFAULT_SEEDS.to_vec()),
            eval_episodes: p.eval_episodes.unwrap_or(DEFAULT_EVAL_EPISODES),
            smoothing_window: p.smoothing_window.unwrap_or(1),
            checkpoint_every: p.checkpoint_every.unwrap_or(0),
            noise_mode: p.noise_mode.unwrap_or_default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !ENV_NAMES.contains(&self.env.as_str()) {
            return Err(Error::Config(format!(
                "unknown environment `{}` (available: {})",
                self.env,
                ENV_NAMES.join(", ")
            )));
        }
        self.arch.validate()?;
        if let Some(k) = self.arch.kappa {
            if !(k > 0.0 && k <= 1.0) {
                return Err(Error::Config(format!("kappa must lie in (0, 1], got {k}")));
            }
        }
        self.train.validate()?;
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        let mut s = self.seeds.clone();
        s.sort_unstable();
        if s.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("seeds must be distinct".into()));
        }
        if self.eval_episodes == 0 || self.smoothing_window == 0 {
            return Err(Error::Config("eval-episodes and smoothing-window must be positive".into()));
        }
        Ok(())
    }

    /// Every key with its resolved value; feeding this back through
    /// [`ExperimentConfig::resolve`] gives the same experiment.
    pub fn to_partial(&self) -> PartialConfig {
        let t = &self.train;
        PartialConfig {
            env: Some(self.env.clone()),
            algo: Some(t.algo),
            actor: Some(self.arch.actor_kind),
            n_h: Some(self.arch.n_h),
            kappa: self.arch.kappa,
            n_f: self.arch.n_f,
            quad_init: Some(self.arch.quad_init),
            gamma: Some(t.gamma),
            lr: Some(t.lr),
            tau: Some(t.tau),
            batch: Some(t.batch),
            policy_delay: Some(t.policy_delay),
            policy_noise: Some(t.policy_noise),
            noise_clip: Some(t.noise_clip),
            exploration_noise: Some(t.exploration_noise),
            start_steps: Some(t.start_steps),
            steps: Some(t.total_steps),
            eval_every: Some(t.eval_every),
            eval_episodes: Some(self.eval_episodes),
            entropy_mode: Some(t.entropy_mode),
            alpha: Some(t.alpha),
            critic_hidden: Some(t.critic_hidden),
            buffer_capacity: Some(t.buffer_capacity),
            seeds: Some(self.seeds.clone()),
            smoothing_window: Some(self.smoothing_window),
            checkpoint_every: Some(self.checkpoint_every),
            noise_mode: Some(self.noise_mode),
        }
    }
}
