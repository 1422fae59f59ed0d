use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algo::{train, Agent};
use crate::envs::{make_env, Environment};
use crate::error::{Error, Result};
use crate::harness::{evaluate, EvalRecord, ExperimentConfig, LearningCurve, PartialConfig};
use crate::nets::{ActionScale, Actor};
use crate::quadratic::count_parameters;

pub const CURVES_FILE: &str = "curves.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const METADATA_FILE: &str = "metadata.json";
pub const CONFIG_FILE: &str = "config.toml";
pub const CHECKPOINT_DIR: &str = "checkpoints";

pub fn best_checkpoint_path(run_dir: &Path, seed: u64) -> PathBuf {
    run_dir.join(CHECKPOINT_DIR).join(format!("seed_{seed}_best.ckpt"))
}

pub fn periodic_checkpoint_path(run_dir: &Path, seed: u64, step: u64) -> PathBuf {
    run_dir.join(CHECKPOINT_DIR).join(format!("seed_{seed}_step_{step}.ckpt"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub numeric_fault: bool,
    pub best_step: Option<u64>,
    pub best_mean: Option<f64>,
    pub evaluations: Vec<EvalRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakRecord {
    pub value: f64,
    pub step: u64,
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub config: PartialConfig,
    pub actor_parameters: usize,
    pub seeds: Vec<SeedSummary>,
    /// Peak of the seed-mean series over successful seeds.
    pub top_reward: Option<PeakRecord>,
    /// Last point of the smoothed seed-mean series.
    pub final_smoothed_mean: Option<f64>,
}

impl RunSummary {
    pub fn load(run_dir: &Path) -> Result<Self> {
        let path = run_dir.join(SUMMARY_FILE);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Format {
            what: "run summary",
            detail: format!("{}: {e}", path.display()),
        })
    }

    pub fn experiment(&self) -> Result<ExperimentConfig> {
        ExperimentConfig::resolve(&self.config)
    }

    pub fn any_numeric_fault(&self) -> bool {
        self.seeds.iter().any(|s| s.numeric_fault)
    }
}

/// One line of training progress.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Progress {
    pub step: u64,
    pub seed: u64,
    pub eval_mean: f64,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub curve: LearningCurve,
    pub summary: RunSummary,
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn action_scale(env: &dyn Environment) -> Result<ActionScale<f64>> {
    let spec = env.spec();
    ActionScale::new(spec.action_low.clone(), spec.action_high.clone())
}

fn save_actor(actor: &Actor<f64>, path: &Path, seed: u64, rec: &EvalRecord) -> Result<()> {
    let mut ckpt = actor.to_checkpoint();
    ckpt.header.meta.insert("seed".into(), seed.into());
    ckpt.header.meta.insert("step".into(), rec.step.into());
    ckpt.header.meta.insert("eval_mean".into(), rec.mean.into());
    ckpt.save(path)
}

fn run_seed(
    cfg: &ExperimentConfig,
    seed: u64,
    run_dir: &Path,
    progress: &(dyn Fn(Progress) + Sync),
) -> SeedSummary {
    let mut evaluations = Vec::new();
    let mut best: Option<(u64, f64)> = None;
    let result = (|| -> Result<()> {
        let mut env = make_env(&cfg.env)?;
        let mut eval_env = make_env(&cfg.env)?;
        let scale = action_scale(env.as_ref())?;
        let mut agent = Agent::new(&cfg.arch, &cfg.train, env.spec().obs_dim, scale, seed)?;
        train(&mut agent, env.as_mut(), seed, |step, agent| {
            let rec = evaluate(&agent.actor, eval_env.as_mut(), cfg.eval_episodes, seed, step, None)?;
            progress(Progress {
                step,
                seed,
                eval_mean: rec.mean,
            });
            if best.is_none_or(|(_, m)| rec.mean > m) {
                best = Some((step, rec.mean));
                save_actor(&agent.actor, &best_checkpoint_path(run_dir, seed), seed, &rec)?;
            }
            if cfg.checkpoint_every > 0 && step % cfg.checkpoint_every as u64 == 0 {
                save_actor(&agent.actor, &periodic_checkpoint_path(run_dir, seed, step), seed, &rec)?;
            }
            evaluations.push(rec);
            Ok(())
        })?;
        Ok(())
    })();
    SeedSummary {
        seed,
        ok: result.is_ok(),
        numeric_fault: result.as_ref().is_err_and(Error::is_numeric),
        error: result.err().map(|e| e.to_string()),
        best_step: best.map(|b| b.0),
        best_mean: best.map(|b| b.1),
        evaluations,
    }
}

/// Trains every seed of `cfg` (up to `jobs` at a time) and writes the run
/// artifacts under `run_dir`.
///
/// A seed that fails is recorded in the summary and left out of the curve;
/// the others proceed. Everything except `metadata.json` is a function of
/// the config alone.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    run_dir: &Path,
    jobs: usize,
    progress: &(dyn Fn(Progress) + Sync),
) -> Result<RunOutcome> {
    cfg.validate()?;
    let started = SystemTime::now();
    let clock = Instant::now();
    fs::create_dir_all(run_dir.join(CHECKPOINT_DIR)).map_err(|e| Error::io(run_dir, e))?;
    let probe = make_env(&cfg.env)?;
    let (obs_dim, act_dim) = (probe.spec().obs_dim, probe.spec().act_dim);
    let actor_parameters = count_parameters(&cfg.arch, obs_dim, act_dim)?;
    write(&run_dir.join(CONFIG_FILE), cfg.to_partial().to_toml())?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let seeds: Vec<SeedSummary> =
        pool.install(|| cfg.seeds.par_iter().map(|&s| run_seed(cfg, s, run_dir, progress)).collect());

    let ok: Vec<&SeedSummary> = seeds.iter().filter(|s| s.ok).collect();
    let eval_steps = ok
        .first()
        .map(|s| s.evaluations.iter().map(|r| r.step).collect())
        .unwrap_or_default();
    let curve = LearningCurve::new(
        eval_steps,
        ok.iter().map(|s| s.seed).collect(),
        ok.iter().map(|s| s.evaluations.iter().map(|r| r.mean).collect()).collect(),
        ok.iter().map(|s| s.evaluations.iter().map(|r| r.std).collect()).collect(),
    )?;
    curve.save_csv(run_dir.join(CURVES_FILE))?;

    let (top_reward, final_smoothed_mean) = if curve.is_empty() {
        (None, None)
    } else {
        let (value, step) = crate::harness::peak(&curve)?;
        let smoothed = crate::harness::smooth(&curve.seed_mean(), cfg.smoothing_window)?;
        (Some(PeakRecord { value, step }), smoothed.last().copied())
    };
    let summary = RunSummary {
        config: cfg.to_partial(),
        actor_parameters,
        seeds,
        top_reward,
        final_smoothed_mean,
    };
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    write(&run_dir.join(SUMMARY_FILE), text + "\n")?;

    let unix = |t: SystemTime| t.duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let metadata = serde_json::json!({
        "version": env!("CARGO_PKG_VERSION"),
        "started_unix": unix(started),
        "finished_unix": unix(SystemTime::now()),
        "elapsed_secs": clock.elapsed().as_secs_f64(),
        "jobs": jobs.max(1),
    });
    write(&run_dir.join(METADATA_FILE), serde_json::to_string_pretty(&metadata).expect("json") + "\n")?;
    Ok(RunOutcome { curve, summary })
}

/// Reads the curve and summary of a finished run.
pub fn load_run(run_dir: &Path) -> Result<(LearningCurve, RunSummary)> {
    let curve = LearningCurve::load_csv(run_dir.join(CURVES_FILE))?;
    Ok((curve, RunSummary::load(run_dir)?))
}
