use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qmlp::algo::{Algo, EntropyMode};
use qmlp::envs::make_env;
use qmlp::envs::noise::NoiseMode;
use qmlp::harness::experiment::{best_checkpoint_path, RunSummary};
use qmlp::harness::{
    compare_noise, compare_runs, default_levels, evaluate, noise_sweep, render_comparison, render_noise,
    run_experiment, ExperimentConfig, NoiseTarget, PartialConfig,
};
use qmlp::nets::{Actor, ActorKind, ArchitectureConfig, Checkpoint, PolicyKind};
use qmlp::nn::InitKind;
use qmlp::quadratic::{count_parameters, format_thousands};
use qmlp::Error;

#[derive(Parser)]
#[command(name = "qmlp", version, about = "Quadratic-neuron actor networks for TD3 and SAC")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one configuration over several seeds and write curves, summary and checkpoints.
    Train(TrainArgs),
    /// Re-evaluate the best checkpoint of each seed of a run.
    Eval(EvalArgs),
    /// Evaluate best checkpoints under action or observation noise.
    NoiseSweep(SweepArgs),
    /// Compare two runs: top reward and sample efficiency.
    Report(ReportArgs),
    /// Count the trainable parameters of an actor.
    Params(ParamsArgs),
}

/// Every experiment key. Unset flags fall back to the config file, then to
/// the defaults shown.
#[derive(Args, Default)]
struct ConfigFlags {
    /// Environment: pendulum, mountain-car or reacher
    #[arg(long)]
    env: Option<String>,
    /// Algorithm: td3 or sac
    #[arg(long)]
    algo: Option<Algo>,
    /// Actor kind: mlp, qmlp, lmlp or lqmlp
    #[arg(long)]
    actor: Option<ActorKind>,
    /// Hidden width of the actor trunk [default: 64]
    #[arg(long)]
    n_h: Option<usize>,
    /// Quadratic feature ratio in (0, 1]; quadratic actors need this or --n-f
    #[arg(long, conflicts_with = "n_f")]
    kappa: Option<f64>,
    /// Explicit quadratic feature count
    #[arg(long)]
    n_f: Option<usize>,
    /// Quadratic factor initializer: kaiming_uniform, xavier_uniform or zero [default: kaiming_uniform]
    #[arg(long)]
    quad_init: Option<InitKind>,
    /// Discount factor [default: 0.99]
    #[arg(long)]
    gamma: Option<f64>,
    /// Adam learning rate [default: 0.0003]
    #[arg(long)]
    lr: Option<f64>,
    /// Target update rate [default: 0.005]
    #[arg(long)]
    tau: Option<f64>,
    /// Minibatch size [default: 100]
    #[arg(long)]
    batch: Option<usize>,
    /// TD3 critic updates per actor update [default: 2]
    #[arg(long)]
    policy_delay: Option<usize>,
    /// TD3 target smoothing noise, fraction of the action half-range [default: 0.2]
    #[arg(long)]
    policy_noise: Option<f64>,
    /// TD3 target smoothing clip, fraction of the action half-range [default: 0.5]
    #[arg(long)]
    noise_clip: Option<f64>,
    /// TD3 exploration noise, fraction of the action half-range [default: 0.1]
    #[arg(long)]
    exploration_noise: Option<f64>,
    /// Uniform-random warm-up steps [default: 1000]
    #[arg(long)]
    start_steps: Option<usize>,
    /// Total environment steps per seed [default: 30000]
    #[arg(long)]
    steps: Option<usize>,
    /// Evaluation interval in steps [default: 1000]
    #[arg(long)]
    eval_every: Option<usize>,
    /// Episodes per evaluation [default: 10]
    #[arg(long)]
    eval_episodes: Option<usize>,
    /// SAC temperature: auto or fixed [default: auto]
    #[arg(long)]
    entropy_mode: Option<EntropyMode>,
    /// SAC initial (auto) or constant (fixed) temperature [default: 1.0]
    #[arg(long)]
    alpha: Option<f64>,
    /// Critic hidden width [default: 256]
    #[arg(long)]
    critic_hidden: Option<usize>,
    /// Replay buffer capacity, at most 1000000 [default: 100000]
    #[arg(long)]
    buffer_capacity: Option<usize>,
    /// Comma-separated seeds [default: 0,1,2,3,4]
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Trailing window for smoothed metrics [default: 1]
    #[arg(long)]
    smoothing_window: Option<usize>,
    /// Periodic checkpoint interval in steps, 0 for best-only [default: 0]
    #[arg(long)]
    checkpoint_every: Option<usize>,
    /// Test-time noise mode: additive or multiplicative [default: additive]
    #[arg(long)]
    noise_mode: Option<NoiseMode>,
}

impl From<ConfigFlags> for PartialConfig {
    fn from(f: ConfigFlags) -> Self {
        PartialConfig {
            env: f.env,
            algo: f.algo,
            actor: f.actor,
            n_h: f.n_h,
            kappa: f.kappa,
            n_f: f.n_f,
            quad_init: f.quad_init,
            gamma: f.gamma,
            lr: f.lr,
            tau: f.tau,
            batch: f.batch,
            policy_delay: f.policy_delay,
            policy_noise: f.policy_noise,
            noise_clip: f.noise_clip,
            exploration_noise: f.exploration_noise,
            start_steps: f.start_steps,
            steps: f.steps,
            eval_every: f.eval_every,
            eval_episodes: f.eval_episodes,
            entropy_mode: f.entropy_mode,
            alpha: f.alpha,
            critic_hidden: f.critic_hidden,
            buffer_capacity: f.buffer_capacity,
            seeds: f.seeds,
            smoothing_window: f.smoothing_window,
            checkpoint_every: f.checkpoint_every,
            noise_mode: f.noise_mode,
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    /// Flat TOML config file; flags override its keys
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
    /// Seeds trained concurrently [default: available cores]
    #[arg(long)]
    jobs: Option<usize>,
    #[command(flatten)]
    flags: ConfigFlags,
}

#[derive(Args)]
struct EvalArgs {
    /// Run directory written by `train`
    #[arg(long)]
    run: PathBuf,
    /// Restrict to these seeds
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Episodes per seed [default: the run's eval-episodes]
    #[arg(long)]
    episodes: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    /// Run directory to sweep
    #[arg(long)]
    run: PathBuf,
    /// Optional baseline run; adds per-level percent gains
    #[arg(long)]
    baseline: Option<PathBuf>,
    /// What to perturb: action or observation
    #[arg(long)]
    kind: NoiseTarget,
    /// Comma-separated levels [default: 0.05..0.25 for action, 0.01..0.05 for observation]
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<f64>>,
    /// Noise mode [default: the run's noise-mode]
    #[arg(long)]
    noise_mode: Option<NoiseMode>,
    /// Write the tables as JSON to this file
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Run directory of the candidate (e.g. the Q-MLP run)
    #[arg(long)]
    candidate: PathBuf,
    /// Run directory of the baseline (e.g. the MLP run)
    #[arg(long)]
    baseline: PathBuf,
    /// Smoothing window for sample efficiency [default: the candidate's smoothing-window]
    #[arg(long)]
    smoothing_window: Option<usize>,
    /// Also write the comparison as JSON to this file
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct ParamsArgs {
    /// Observation dimension
    #[arg(long)]
    obs_dim: usize,
    /// Action dimension
    #[arg(long)]
    act_dim: usize,
    /// Actor kind: mlp, qmlp, lmlp or lqmlp
    #[arg(long)]
    actor: ActorKind,
    /// Hidden width of the actor trunk [default: 64]
    #[arg(long)]
    n_h: Option<usize>,
    /// Quadratic feature ratio in (0, 1]
    #[arg(long, conflicts_with = "n_f")]
    kappa: Option<f64>,
    /// Explicit quadratic feature count
    #[arg(long)]
    n_f: Option<usize>,
    /// deterministic (TD3) or gaussian (SAC) [default: deterministic]
    #[arg(long)]
    policy: Option<PolicyKind>,
}

/// A failed command with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Numeric { .. } => 3,
            Error::Config(_) | Error::Validation(_) | Error::Io { .. } | Error::Format { .. } => 2,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::NoiseSweep(a) => cmd_noise_sweep(a),
        Command::Report(a) => cmd_report(a),
        Command::Params(a) => cmd_params(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> CmdResult {
    let text = serde_json::to_string_pretty(value).expect("serializable") + "\n";
    std::fs::write(path, text).map_err(|e| Failure::from(Error::Io {
        path: path.to_path_buf(),
        source: e,
    }))
}

fn cmd_train(a: TrainArgs) -> CmdResult {
    let file = match &a.config {
        Some(p) => PartialConfig::load(p)?,
        None => PartialConfig::default(),
    };
    let cfg = ExperimentConfig::resolve(&file.overlay(a.flags.into()))?;
    let jobs = a
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let out = run_experiment(&cfg, &a.out, jobs, &|p| {
        println!("step={} seed={} eval_mean={}", p.step, p.seed, p.eval_mean);
    })?;
    for s in &out.summary.seeds {
        match &s.error {
            None => println!(
                "seed={} status=ok best_step={} best_mean={}",
                s.seed,
                s.best_step.unwrap_or(0),
                s.best_mean.unwrap_or(f64::NAN)
            ),
            Some(e) => println!("seed={} status=failed error={e}", s.seed),
        }
    }
    if let Some(t) = &out.summary.top_reward {
        println!("top_reward={} top_step={}", t.value, t.step);
    }
    println!("wrote {}", a.out.display());
    if out.summary.any_numeric_fault() {
        return Err(Failure {
            code: 3,
            message: "numeric fault in at least one seed; see summary.json".into(),
        });
    }
    if out.summary.seeds.iter().any(|s| !s.ok) {
        return Err(Failure {
            code: 1,
            message: "at least one seed failed; see summary.json".into(),
        });
    }
    Ok(())
}

fn cmd_eval(a: EvalArgs) -> CmdResult {
    let summary = RunSummary::load(&a.run)?;
    let cfg = summary.experiment()?;
    let episodes = a.episodes.unwrap_or(cfg.eval_episodes);
    let mut env = make_env(&cfg.env)?;
    for s in summary.seeds.iter().filter(|s| s.ok) {
        if a.seeds.as_ref().is_some_and(|want| !want.contains(&s.seed)) {
            continue;
        }
        let ckpt = Checkpoint::load(best_checkpoint_path(&a.run, s.seed))?;
        let actor = Actor::<f64>::from_checkpoint(&ckpt)?;
        let rec = evaluate(&actor, env.as_mut(), episodes, s.seed, 0, None)?;
        println!("seed={} eval_mean={} eval_std={}", s.seed, rec.mean, rec.std);
    }
    Ok(())
}

fn cmd_noise_sweep(a: SweepArgs) -> CmdResult {
    let levels = a.levels.unwrap_or_else(|| default_levels(a.kind));
    let table = noise_sweep(&a.run, a.kind, &levels, a.noise_mode)?;
    for (i, seed) in table.seeds.iter().enumerate() {
        let row: Vec<String> = table.per_seed[i].iter().map(|v| v.to_string()).collect();
        println!(
            "seed={seed} no_noise={} stored={} {}={}",
            table.no_noise[i],
            table.stored[i],
            a.kind,
            row.join(",")
        );
    }
    let means: Vec<String> = table.means.iter().map(|v| v.to_string()).collect();
    println!("levels={}", levels.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(","));
    println!("mean no_noise={} {}={}", table.no_noise_mean, a.kind, means.join(","));
    let comparison = match &a.baseline {
        Some(b) => {
            let base = noise_sweep(b, a.kind, &levels, a.noise_mode)?;
            let c = compare_noise(&table, &base)?;
            print!("{}", render_noise(&c));
            Some(c)
        }
        None => None,
    };
    if let Some(path) = &a.json {
        write_json(path, &serde_json::json!({ "table": table, "comparison": comparison }))?;
    }
    Ok(())
}

fn cmd_report(a: ReportArgs) -> CmdResult {
    for dir in [&a.candidate, &a.baseline] {
        if !dir.is_dir() {
            return Err(Failure {
                code: 2,
                message: format!("run directory {} does not exist", dir.display()),
            });
        }
    }
    let c = compare_runs(&a.candidate, &a.baseline, a.smoothing_window)?;
    print!("{}", render_comparison(&c));
    println!("{}", serde_json::to_string(&c).expect("serializable"));
    if let Some(path) = &a.json {
        write_json(path, &c)?;
    }
    Ok(())
}

fn cmd_params(a: ParamsArgs) -> CmdResult {
    if a.obs_dim == 0 || a.act_dim == 0 {
        return Err(Failure {
            code: 2,
            message: "--obs-dim and --act-dim must be positive".into(),
        });
    }
    let mut arch = ArchitectureConfig::mlp(a.n_h.unwrap_or(64), a.policy.unwrap_or(PolicyKind::Deterministic))
        .with_kind(a.actor);
    arch.kappa = a.kappa;
    arch.n_f = a.n_f;
    let n = count_parameters(&arch, a.obs_dim, a.act_dim)?;
    println!("{n} ({})", format_thousands(n));
    Ok(())
}
