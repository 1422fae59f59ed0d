//! Experiment methodology: multi-seed runs, evaluation, curve metrics,
//! noise sweeps and result files.

mod config;
mod curve;
mod eval;
pub mod experiment;
mod metrics;
pub mod report;
pub mod sweep;

pub use config::{ExperimentConfig, PartialConfig, DEFAULT_EVAL_EPISODES, DEFAULT_N_H, DEFAULT_SEEDS, REFERENCE_EVAL_EVERY};
pub use curve::LearningCurve;
pub use eval::{evaluate, mean_std, EvalRecord, NoiseSpec, NoiseTarget};
pub use experiment::{load_run, run_experiment, Progress, RunOutcome, RunSummary, SeedSummary};
pub use metrics::{
    improvement_percent, peak, sample_efficiency, smooth, step_reduction_percent, top_reward_improvement,
    SampleEfficiency, TopReward,
};
pub use report::{compare_curves, compare_runs, render_comparison, render_noise, Comparison, INCOMPARABLE};
pub use sweep::{
    compare_noise, default_levels, noise_sweep, NoiseComparison, NoiseTable, ACTION_NOISE_LEVELS, OBSERVATION_NOISE_LEVELS,
};
