//! Actor topologies, the twin critic and their checkpoint format.

mod actor;
mod checkpoint;
mod config;
mod critic;

pub use actor::{ActionScale, Actor, SquashedSample, LOG_STD_MAX, LOG_STD_MIN};
pub use checkpoint::{BlockRecord, Checkpoint, CheckpointHeader, NetworkRecord, MAGIC};
pub use config::{ActorKind, ArchitectureConfig, PolicyKind};
pub use critic::{Critic, QNetwork, DEFAULT_CRITIC_HIDDEN};
