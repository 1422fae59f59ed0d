use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::envs::make_env;
use crate::envs::noise::NoiseMode;
use crate::error::{Error, Result};
use crate::harness::experiment::{best_checkpoint_path, RunSummary};
use crate::harness::metrics::improvement_percent;
use crate::harness::{evaluate, NoiseSpec, NoiseTarget};
use crate::nets::{Actor, Checkpoint};

pub const ACTION_NOISE_LEVELS: [f64; 5] = [0.05, 0.1, 0.15, 0.2, 0.25];
pub const OBSERVATION_NOISE_LEVELS: [f64; 5] = [0.01, 0.02, 0.03, 0.04, 0.05];

pub fn default_levels(target: NoiseTarget) -> Vec<f64> {
    match target {
        NoiseTarget::Action => ACTION_NOISE_LEVELS.to_vec(),
        NoiseTarget::Observation => OBSERVATION_NOISE_LEVELS.to_vec(),
    }
}

/// Mean returns of each seed's best checkpoint under test-time noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseTable {
    pub target: NoiseTarget,
    pub mode: NoiseMode,
    pub levels: Vec<f64>,
    pub seeds: Vec<u64>,
    /// Noise-free re-evaluation per seed.
    pub no_noise: Vec<f64>,
    /// Best evaluation mean recorded during training, per seed.
    pub stored: Vec<f64>,
    /// `seeds x levels`.
    pub per_seed: Vec<Vec<f64>>,
    /// Seed average per level.
    pub means: Vec<f64>,
    pub no_noise_mean: f64,
}

fn average(v: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    sum / n as f64
}

/// Re-evaluates the best checkpoint of every successful seed of a run at
/// each noise level. Evaluation episodes reuse the training evaluation
/// seeds, so the noise-free column reproduces the stored best evaluation.
pub fn noise_sweep(run_dir: &Path, target: NoiseTarget, levels: &[f64], mode: Option<NoiseMode>) -> Result<NoiseTable> {
    if levels.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
        return Err(Error::Config("noise levels must be non-negative".into()));
    }
    let summary = RunSummary::load(run_dir)?;
    let cfg = summary.experiment()?;
    let mode = mode.unwrap_or(cfg.noise_mode);
    let mut env = make_env(&cfg.env)?;
    let mut table = NoiseTable {
        target,
        mode,
        levels: levels.to_vec(),
        seeds: Vec::new(),
        no_noise: Vec::new(),
        stored: Vec::new(),
        per_seed: Vec::new(),
        means: Vec::new(),
        no_noise_mean: f64::NAN,
    };
    for s in summary.seeds.iter().filter(|s| s.ok) {
        let path = best_checkpoint_path(run_dir, s.seed);
        let ckpt = Checkpoint::load(&path).map_err(|e| match e {
            Error::Io { source, .. } => Error::Io {
                path: path.clone(),
                source: std::io::Error::new(source.kind(), format!("best checkpoint of seed {}: {source}", s.seed)),
            },
            other => other,
        })?;
        let actor = Actor::<f64>::from_checkpoint(&ckpt)?;
        let clean = evaluate(&actor, env.as_mut(), cfg.eval_episodes, s.seed, 0, None)?;
        let row = levels
            .iter()
            .map(|&level| {
                let noise = NoiseSpec { target, level, mode };
                evaluate(&actor, env.as_mut(), cfg.eval_episodes, s.seed, 0, Some(noise)).map(|r| r.mean)
            })
            .collect::<Result<Vec<f64>>>()?;
        table.seeds.push(s.seed);
        table.no_noise.push(clean.mean);
        table.stored.push(s.best_mean.unwrap_or(f64::NAN));
        table.per_seed.push(row);
    }
    if table.seeds.is_empty() {
        return Err(Error::State(format!("run {} has no successful seeds", run_dir.display())));
    }
    table.means = (0..levels.len())
        .map(|j| average(table.per_seed.iter().map(|r| r[j])))
        .collect();
    table.no_noise_mean = average(table.no_noise.iter().copied());
    Ok(table)
}

/// Candidate-over-baseline gain at every noise level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseComparison {
    pub target: NoiseTarget,
    pub levels: Vec<f64>,
    pub candidate: Vec<f64>,
    pub baseline: Vec<f64>,
    pub percent: Vec<Option<f64>>,
    pub no_noise_percent: Option<f64>,
}

pub fn compare_noise(candidate: &NoiseTable, baseline: &NoiseTable) -> Result<NoiseComparison> {
    if candidate.levels != baseline.levels || candidate.target != baseline.target {
        return Err(Error::Validation("noise tables cover different grids".into()));
    }
    Ok(NoiseComparison {
        target: candidate.target,
        levels: candidate.levels.clone(),
        candidate: candidate.means.clone(),
        baseline: baseline.means.clone(),
        percent: candidate
            .means
            .iter()
            .zip(&baseline.means)
            .map(|(&c, &b)| improvement_percent(c, b))
            .collect(),
        no_noise_percent: improvement_percent(candidate.no_noise_mean, baseline.no_noise_mean),
    })
}
