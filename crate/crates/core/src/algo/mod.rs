//! Off-policy actor-critic training: TD3 and SAC.

mod agent;
mod config;
mod train;

pub use agent::{Agent, UpdateStats};
pub use config::{Algo, EntropyMode, TrainConfig};
pub use train::{eval_schedule, train, TrainLog};
