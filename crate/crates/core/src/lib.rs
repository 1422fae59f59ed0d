//! Actor-critic reinforcement learning with quadratic-neuron policy
//! networks.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! at the crate root fix it to `f64`, which is what the training stack and
//! the CLI use.

pub mod algo;
pub mod envs;
pub mod error;
pub mod harness;
pub mod nets;
pub mod nn;
pub mod quadratic;
pub mod replay;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Matrix = nn::Matrix<f64>;
pub type ParamBlock = nn::ParamBlock<f64>;
pub type DenseLayer = nn::DenseLayer<f64>;
pub type QuadraticNeuron = quadratic::QuadraticNeuron<f64>;
pub type ExplicitQuadratic = quadratic::ExplicitQuadratic<f64>;
pub type Actor = nets::Actor<f64>;
pub type Critic = nets::Critic<f64>;
pub type ActionScale = nets::ActionScale<f64>;
