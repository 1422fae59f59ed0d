use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::harness::experiment::load_run;
use crate::harness::metrics::{sample_efficiency, top_reward_improvement, SampleEfficiency, TopReward};
use crate::harness::sweep::NoiseComparison;
use crate::harness::LearningCurve;

/// Marker for comparisons the data cannot support.
pub const INCOMPARABLE: &str = "~0%";

/// Top-reward and sample-efficiency comparison of two runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub environment: String,
    pub candidate: String,
    pub baseline: String,
    pub smoothing_window: usize,
    pub top_reward: TopReward,
    pub sample_efficiency: SampleEfficiency,
}

pub fn compare_curves(
    environment: &str,
    (candidate_label, candidate): (&str, &LearningCurve),
    (baseline_label, baseline): (&str, &LearningCurve),
    window: usize,
) -> Result<Comparison> {
    Ok(Comparison {
        environment: environment.to_string(),
        candidate: candidate_label.to_string(),
        baseline: baseline_label.to_string(),
        smoothing_window: window,
        top_reward: top_reward_improvement(candidate, baseline)?,
        sample_efficiency: sample_efficiency(candidate, baseline, window)?,
    })
}

/// Compares two run directories; `window` defaults to the candidate's
/// configured smoothing window.
pub fn compare_runs(candidate_dir: &Path, baseline_dir: &Path, window: Option<usize>) -> Result<Comparison> {
    let (c_curve, c_sum) = load_run(candidate_dir)?;
    let (b_curve, b_sum) = load_run(baseline_dir)?;
    let c_cfg = c_sum.experiment()?;
    let b_cfg = b_sum.experiment()?;
    let label = |cfg: &crate::harness::ExperimentConfig| format!("{} {}", cfg.arch.actor_kind, cfg.train.algo);
    compare_curves(
        &c_cfg.env,
        (&label(&c_cfg), &c_curve),
        (&label(&b_cfg), &b_curve),
        window.unwrap_or(c_cfg.smoothing_window),
    )
}

/// `575k`, `1M`, or the plain count when it is not a whole thousand.
pub fn format_steps(steps: u64) -> String {
    if steps > 0 && steps % 1_000_000 == 0 {
        format!("{}M", steps / 1_000_000)
    } else if steps > 0 && steps % 1000 == 0 {
        format!("{}k", steps / 1000)
    } else {
        steps.to_string()
    }
}

pub fn format_percent(p: Option<f64>) -> String {
    match p {
        Some(p) => format!("{p:.2}%"),
        None => "undefined".into(),
    }
}

fn row(out: &mut String, cells: [&str; 4]) {
    writeln!(out, "{:<16} {:>16} {:>16} {:>12}", cells[0], cells[1], cells[2], cells[3]).expect("string write");
}

/// Text tables in the layout of the published top-reward and
/// sample-efficiency tables.
pub fn render_comparison(c: &Comparison) -> String {
    let mut out = String::new();
    out.push_str("top reward\n");
    row(&mut out, ["environment", &c.candidate, &c.baseline, "improvement"]);
    let t = &c.top_reward;
    let mut pct = format_percent(t.percent);
    if t.sign_caveat {
        pct.push('*');
    }
    row(&mut out, [&c.environment, &format!("{:.2}", t.candidate), &format!("{:.2}", t.baseline), &pct]);
    if t.sign_caveat {
        out.push_str("* baseline peak is not positive; the sign of the improvement is relative to |baseline|\n");
    }
    out.push('\n');
    writeln!(out, "sample efficiency (smoothing window {})", c.smoothing_window).expect("string write");
    row(&mut out, ["environment", &c.candidate, &c.baseline, "improvement"]);
    match &c.sample_efficiency {
        SampleEfficiency::Comparable {
            steps_candidate,
            steps_baseline,
            percent,
            ..
        } => row(
            &mut out,
            [&c.environment, &format_steps(*steps_candidate), &format_steps(*steps_baseline), &format_percent(Some(*percent))],
        ),
        SampleEfficiency::Incomparable { .. } => row(&mut out, [&c.environment, "--", "--", INCOMPARABLE]),
    }
    out
}

pub fn render_noise(c: &NoiseComparison) -> String {
    let mut out = String::new();
    write!(out, "{:<12}", format!("{} noise", c.target)).expect("string write");
    for l in &c.levels {
        write!(out, " {l:>10}").expect("string write");
    }
    out.push('\n');
    for (label, values) in [("candidate", &c.candidate), ("baseline", &c.baseline)] {
        write!(out, "{label:<12}").expect("string write");
        for v in values {
            write!(out, " {v:>10.2}").expect("string write");
        }
        out.push('\n');
    }
    write!(out, "{:<12}", "gain").expect("string write");
    for p in &c.percent {
        write!(out, " {:>10}", format_percent(*p)).expect("string write");
    }
    out.push('\n');
    out
}
