use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 4] = ["step", "seed", "eval_mean", "eval_std"];

/// Evaluation means and standard deviations for several seeds on a shared
/// step grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LearningCurve {
    pub eval_steps: Vec<u64>,
    pub seeds: Vec<u64>,
    /// `seeds x evals`.
    pub means: Vec<Vec<f64>>,
    /// `seeds x evals`.
    pub stds: Vec<Vec<f64>>,
}

fn invalid(detail: impl Into<String>) -> Error {
    Error::Validation(detail.into())
}

impl LearningCurve {
    pub fn new(eval_steps: Vec<u64>, seeds: Vec<u64>, means: Vec<Vec<f64>>, stds: Vec<Vec<f64>>) -> Result<Self> {
        let curve = Self {
            eval_steps,
            seeds,
            means,
            stds,
        };
        curve.validate()?;
        Ok(curve)
    }

    /// A single-seed curve with zero spread, handy for synthetic series.
    pub fn from_series(eval_steps: Vec<u64>, values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        Self::new(eval_steps, vec![0], vec![values], vec![vec![0.0; n]])
    }

    pub fn validate(&self) -> Result<()> {
        if self.eval_steps.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("eval steps must be strictly increasing"));
        }
        if self.means.len() != self.seeds.len() || self.stds.len() != self.seeds.len() {
            return Err(invalid(format!(
                "{} seeds but {} mean rows and {} std rows",
                self.seeds.len(),
                self.means.len(),
                self.stds.len()
            )));
        }
        let n = self.eval_steps.len();
        if self.means.iter().chain(&self.stds).any(|row| row.len() != n) {
            return Err(invalid(format!("every row needs {n} evaluations")));
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("seeds must be distinct"));
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.eval_steps.is_empty() || self.seeds.is_empty()
    }

    /// Mean over seeds at every evaluation step.
    pub fn seed_mean(&self) -> Vec<f64> {
        let k = self.seeds.len() as f64;
        (0..self.eval_steps.len())
            .map(|j| self.means.iter().map(|row| row[j]).sum::<f64>() / k)
            .collect()
    }

    /// CSV text: one row per `(step, seed)`, steps outermost. Floats use the
    /// shortest representation that parses back to the same value.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::Format {
            what: "curve CSV",
            detail: e.to_string(),
        };
        w.write_record(CSV_HEADER).map_err(csv_err)?;
        for (j, step) in self.eval_steps.iter().enumerate() {
            for (i, seed) in self.seeds.iter().enumerate() {
                w.write_record([
                    step.to_string(),
                    seed.to_string(),
                    self.means[i][j].to_string(),
                    self.stds[i][j].to_string(),
                ])
                .map_err(csv_err)?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Format {
            what: "curve CSV",
            detail: e.to_string(),
        })?;
        Ok(String::from_utf8(bytes).expect("ascii output"))
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let fmt = |detail: String| Error::Format {
            what: "curve CSV",
            detail,
        };
        let mut r = csv::ReaderBuilder::new().from_reader(text.as_bytes());
        let header = r.headers().map_err(|e| fmt(e.to_string()))?;
        if header.iter().map(str::trim).ne(CSV_HEADER) {
            return Err(fmt(format!("expected header {}", CSV_HEADER.join(","))));
        }
        let mut steps: Vec<u64> = Vec::new();
        let mut seeds: Vec<u64> = Vec::new();
        let mut cells: Vec<(u64, u64, f64, f64)> = Vec::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| fmt(e.to_string()))?;
            let field = |k: usize| rec.get(k).map(str::trim).unwrap_or("");
            let bad = |k: usize| fmt(format!("row {}: bad {} `{}`", line + 2, CSV_HEADER[k], field(k)));
            let step: u64 = field(0).parse().map_err(|_| bad(0))?;
            let seed: u64 = field(1).parse().map_err(|_| bad(1))?;
            let mean: f64 = field(2).parse().map_err(|_| bad(2))?;
            let std: f64 = field(3).parse().map_err(|_| bad(3))?;
            if steps.last() != Some(&step) {
                steps.push(step);
            }
            if !seeds.contains(&seed) {
                seeds.push(seed);
            }
            cells.push((step, seed, mean, std));
        }
        let (n, k) = (steps.len(), seeds.len());
        if cells.len() != n * k {
            return Err(fmt(format!("{} rows for {n} steps x {k} seeds", cells.len())));
        }
        let mut means = vec![vec![0.0; n]; k];
        let mut stds = vec![vec![0.0; n]; k];
        for (idx, (step, seed, mean, std)) in cells.into_iter().enumerate() {
            let (j, i) = (idx / k, idx % k);
            if steps[j] != step || seeds[i] != seed {
                return Err(fmt(format!("row {} out of (step, seed) order", idx + 2)));
            }
            means[i][j] = mean;
            stds[i][j] = std;
        }
        Self::new(steps, seeds, means, stds)
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()?).map_err(|e| Error::io(path, e))
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text)
    }
}
