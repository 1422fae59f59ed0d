//! Comparisons between learning curves.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::LearningCurve;

/// Trailing moving average. Point `i` averages `values[i+1-k ..= i]`; the
/// first `k - 1` points average the available prefix.
pub fn smooth(values: &[f64], window: usize) -> Result<Vec<f64>> {
    if window == 0 {
        return Err(Error::Config("smoothing window must be at least 1".into()));
    }
    let out = (0..values.len())
        .map(|i| {
            let n = (i + 1).min(window);
            values[i + 1 - n..=i].iter().sum::<f64>() / n as f64
        })
        .collect();
    Ok(out)
}

/// Relative change `100 (c - b) / |b|`. `None` when `b` is zero.
pub fn improvement_percent(candidate: f64, baseline: f64) -> Option<f64> {
    (baseline != 0.0).then(|| 100.0 * (candidate - baseline) / baseline.abs())
}

/// Relative step saving `100 (b - c) / b`.
pub fn step_reduction_percent(steps_candidate: u64, steps_baseline: u64) -> Option<f64> {
    (steps_baseline != 0).then(|| 100.0 * (steps_baseline as f64 - steps_candidate as f64) / steps_baseline as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopReward {
    pub candidate: f64,
    pub baseline: f64,
    pub candidate_step: u64,
    pub baseline_step: u64,
    /// `None` when the baseline peak is zero.
    pub percent: Option<f64>,
    /// Set when the baseline peak is not positive, where the sign of the
    /// percentage no longer reads as "better" or "worse" on its own.
    pub sign_caveat: bool,
}

/// Peak of a seed-mean series and the first step where it occurs.
pub fn peak(curve: &LearningCurve) -> Result<(f64, u64)> {
    if curve.is_empty() {
        return Err(Error::Validation("curve has no evaluations".into()));
    }
    let series = curve.seed_mean();
    let mut best = (series[0], curve.eval_steps[0]);
    for (&v, &s) in series.iter().zip(&curve.eval_steps) {
        if v > best.0 {
            best = (v, s);
        }
    }
    Ok(best)
}

/// Compares the maxima of the raw seed-mean series.
pub fn top_reward_improvement(candidate: &LearningCurve, baseline: &LearningCurve) -> Result<TopReward> {
    let (c, cs) = peak(candidate)?;
    let (b, bs) = peak(baseline)?;
    Ok(TopReward {
        candidate: c,
        baseline: b,
        candidate_step: cs,
        baseline_step: bs,
        percent: improvement_percent(c, b),
        sign_caveat: b <= 0.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum SampleEfficiency {
    Comparable {
        threshold: f64,
        steps_candidate: u64,
        steps_baseline: u64,
        percent: f64,
    },
    /// At least one smoothed series never reaches the threshold.
    Incomparable {
        threshold: f64,
        steps_candidate: Option<u64>,
        steps_baseline: Option<u64>,
    },
}

impl SampleEfficiency {
    pub fn percent(&self) -> Option<f64> {
        match self {
            SampleEfficiency::Comparable { percent, .. } => Some(*percent),
            SampleEfficiency::Incomparable { .. } => None,
        }
    }
}

fn first_crossing(steps: &[u64], series: &[f64], threshold: f64) -> Option<u64> {
    series.iter().zip(steps).find(|(&v, _)| v >= threshold).map(|(_, &s)| s)
}

/// Steps each method needs to reach the weaker method's top reward.
///
/// The threshold is the lower of the two raw seed-mean peaks; crossings are
/// read off the seed-mean series smoothed with `window`.
pub fn sample_efficiency(candidate: &LearningCurve, baseline: &LearningCurve, window: usize) -> Result<SampleEfficiency> {
    let (c, _) = peak(candidate)?;
    let (b, _) = peak(baseline)?;
    let threshold = c.min(b);
    let sc = first_crossing(&candidate.eval_steps, &smooth(&candidate.seed_mean(), window)?, threshold);
    let sb = first_crossing(&baseline.eval_steps, &smooth(&baseline.seed_mean(), window)?, threshold);
    Ok(match (sc, sb) {
        (Some(steps_candidate), Some(steps_baseline)) => match step_reduction_percent(steps_candidate, steps_baseline) {
            Some(percent) => SampleEfficiency::Comparable {
                threshold,
                steps_candidate,
                steps_baseline,
                percent,
            },
            None => SampleEfficiency::Incomparable {
                threshold,
                steps_candidate: sc,
                steps_baseline: sb,
            },
        },
        _ => SampleEfficiency::Incomparable {
            threshold,
            steps_candidate: sc,
            steps_baseline: sb,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn curve(values: &[f64]) -> LearningCurve {
        let steps = (1..=values.len() as u64).map(|k| k * 1000).collect();
        LearningCurve::from_series(steps, values.to_vec()).unwrap()
    }

    #[test]
    fn smoothing_examples() {
        let ramp: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(*smooth(&ramp, 8).unwrap().last().unwrap(), 6.5);
        assert_eq!(smooth(&ramp, 1).unwrap(), ramp);
        assert_eq!(smooth(&[4.0; 6], 3).unwrap(), vec![4.0; 6]);
        assert_eq!(smooth(&[2.0, 4.0, 6.0], 8).unwrap(), vec![2.0, 3.0, 4.0]);
        assert!(smooth(&ramp, 0).is_err());
    }

    #[test]
    fn published_rows() {
        let p = improvement_percent(3847.40, 3317.29).unwrap();
        assert!((p - 15.98).abs() < 0.005);
        let p = improvement_percent(10295.54, 9247.73).unwrap();
        assert!((p - 11.33).abs() < 0.005);
        let p = step_reduction_percent(575_000, 970_000).unwrap();
        assert!((p - 40.72).abs() < 0.005);
        let p = step_reduction_percent(740_000, 1_000_000).unwrap();
        assert!((p - 26.00).abs() < 0.005);
    }

    #[test]
    fn identical_curves_compare_equal() {
        let c = curve(&[-5.0, 1.0, 3.0, 2.0]);
        assert_eq!(top_reward_improvement(&c, &c).unwrap().percent, Some(0.0));
        assert_eq!(sample_efficiency(&c, &c, 1).unwrap().percent(), Some(0.0));
    }

    #[test]
    fn zero_baseline_peak_is_undefined() {
        let t = top_reward_improvement(&curve(&[1.0]), &curve(&[0.0, -1.0])).unwrap();
        assert_eq!(t.percent, None);
        assert!(t.sign_caveat);
    }

    #[test]
    fn negative_baseline_flags_sign() {
        let t = top_reward_improvement(&curve(&[-100.0]), &curve(&[-200.0])).unwrap();
        assert_eq!(t.percent, Some(50.0));
        assert!(t.sign_caveat);
    }

    #[test]
    fn smoothed_series_that_misses_the_threshold_is_incomparable() {
        // The baseline's single spike sets the threshold but its smoothed
        // series never reaches it.
        let cand = curve(&[0.0, 5.0, 10.0, 10.0]);
        let base = curve(&[0.0, 0.0, 8.0, 0.0]);
        let se = sample_efficiency(&cand, &base, 2).unwrap();
        assert!(matches!(
            se,
            SampleEfficiency::Incomparable {
                steps_candidate: Some(4000),
                steps_baseline: None,
                ..
            }
        ));
    }

    #[test]
    fn faster_candidate_saves_steps() {
        let cand = curve(&[0.0, 6.0, 7.0, 9.0]);
        let base = curve(&[0.0, 1.0, 3.0, 6.0]);
        let se = sample_efficiency(&cand, &base, 1).unwrap();
        assert_eq!(se.percent(), Some(50.0));
    }

    proptest! {
        #[test]
        fn smoothing_is_linear(
            xs in prop::collection::vec(-1e3f64..1e3, 1..30),
            a in -3.0f64..3.0,
            k in 1usize..10,
        ) {
            let ys: Vec<f64> = xs.iter().map(|x| x * 0.5 - 2.0).collect();
            let combo: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| a * x + y).collect();
            let lhs = smooth(&combo, k).unwrap();
            let sx = smooth(&xs, k).unwrap();
            let sy = smooth(&ys, k).unwrap();
            for i in 0..xs.len() {
                prop_assert!((lhs[i] - (a * sx[i] + sy[i])).abs() < 1e-9);
            }
        }
    }
}
