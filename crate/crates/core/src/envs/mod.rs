//! Built-in continuous-control environments.
//!
//! All environments integrate their dynamics with semi-implicit Euler
//! (velocity first, then position from the new velocity) at a fixed `dt`.
//! Out-of-range actions are clipped to the bounds and counted as clip
//! events; non-finite actions are rejected. `done` marks physical
//! termination only, `truncated` the step limit.

pub mod mountain_car;
pub mod noise;
pub mod pendulum;
pub mod reacher;

use std::collections::BTreeMap;

pub use mountain_car::MountainCar;
pub use noise::{add_action_noise, add_observation_noise, NoiseMode};
pub use pendulum::Pendulum;
pub use reacher::Reacher;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EnvSpec {
    pub name: &'static str,
    pub obs_dim: usize,
    pub act_dim: usize,
    pub action_low: Vec<f64>,
    pub action_high: Vec<f64>,
    pub max_episode_steps: usize,
    pub dt: f64,
    pub constants: BTreeMap<&'static str, f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub next_obs: Vec<f64>,
    pub reward: f64,
    pub done: bool,
    pub truncated: bool,
}

pub trait Environment: Send {
    fn spec(&self) -> &EnvSpec;

    /// Starts a new episode from the seeded initial distribution.
    fn reset(&mut self, seed: u64) -> Vec<f64>;

    fn step(&mut self, action: &[f64]) -> Result<StepResult>;

    /// Number of actions clipped into bounds since construction.
    fn clip_events(&self) -> u64;
}

/// Names accepted by [`make_env`].
pub const ENV_NAMES: [&str; 3] = ["pendulum", "mountain-car", "reacher"];

pub fn make_env(name: &str) -> Result<Box<dyn Environment>> {
    match name.to_ascii_lowercase().replace('_', "-").as_str() {
        "pendulum" => Ok(Box::new(Pendulum::new())),
        "mountain-car" | "mountaincar" => Ok(Box::new(MountainCar::new())),
        "reacher" | "point-mass" => Ok(Box::new(Reacher::new())),
        other => Err(Error::Config(format!(
            "unknown environment `{other}` (available: {})",
            ENV_NAMES.join(", ")
        ))),
    }
}

/// Step counter and action sanitizer shared by the environments.
#[derive(Debug, Clone, Default)]
pub(crate) struct EpisodeClock {
    pub steps: usize,
    pub clip_events: u64,
    pub active: bool,
}

impl EpisodeClock {
    pub fn reset(&mut self) {
        self.steps = 0;
        self.active = true;
    }

    /// Validates and clips `action`; errors on wrong length or non-finite
    /// entries.
    pub fn admit(&mut self, spec: &EnvSpec, action: &[f64]) -> Result<Vec<f64>> {
        if !self.active {
            return Err(Error::State(format!("{}: step after episode end; call reset", spec.name)));
        }
        if action.len() != spec.act_dim {
            return Err(Error::dim("environment action", spec.act_dim, action.len()));
        }
        if let Some(bad) = action.iter().find(|a| !a.is_finite()) {
            return Err(Error::Numeric {
                location: format!("{} action", spec.name),
                detail: format!("non-finite action component {bad}"),
            });
        }
        let mut clipped = false;
        let out = action
            .iter()
            .zip(spec.action_low.iter().zip(&spec.action_high))
            .map(|(&a, (&lo, &hi))| {
                let c = a.clamp(lo, hi);
                clipped |= c != a;
                c
            })
            .collect();
        if clipped {
            self.clip_events += 1;
        }
        Ok(out)
    }

    /// Advances the counter; returns whether the step limit was reached.
    pub fn tick(&mut self, spec: &EnvSpec, done: bool) -> bool {
        self.steps += 1;
        let truncated = !done && self.steps >= spec.max_episode_steps;
        if done || truncated {
            self.active = false;
        }
        truncated
    }
}
