use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// How a noise level perturbs a value `x` with `ε ~ N(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseMode {
    /// `x + level·ε`
    #[default]
    Additive,
    /// `x·(1 + level·ε)`
    Multiplicative,
}

impl std::str::FromStr for NoiseMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "additive" => Ok(NoiseMode::Additive),
            "multiplicative" => Ok(NoiseMode::Multiplicative),
            other => Err(format!("unknown noise mode `{other}` (expected additive or multiplicative)")),
        }
    }
}

fn perturb(x: f64, level: f64, mode: NoiseMode, rng: &mut impl Rng) -> f64 {
    let eps: f64 = rng.sample(StandardNormal);
    match mode {
        NoiseMode::Additive => x + level * eps,
        NoiseMode::Multiplicative => x * (1.0 + level * eps),
    }
}

/// Perturbs an action and clips it back into `[low, high]`. A zero level
/// returns the action unchanged without consuming randomness.
pub fn add_action_noise(
    action: &[f64],
    level: f64,
    low: &[f64],
    high: &[f64],
    mode: NoiseMode,
    rng: &mut impl Rng,
) -> Vec<f64> {
    if level == 0.0 {
        return action.to_vec();
    }
    action
        .iter()
        .zip(low.iter().zip(high))
        .map(|(&a, (&lo, &hi))| perturb(a, level, mode, rng).clamp(lo, hi))
        .collect()
}

/// Perturbs an observation; no clipping.
pub fn add_observation_noise(obs: &[f64], level: f64, mode: NoiseMode, rng: &mut impl Rng) -> Vec<f64> {
    if level == 0.0 {
        return obs.to_vec();
    }
    obs.iter().map(|&x| perturb(x, level, mode, rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from;

    fn empirical_std(samples: &[f64]) -> f64 {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    }

    #[test]
    fn zero_level_is_identity() {
        let mut r = rng_from(0);
        let a = [0.3, -1.0];
        assert_eq!(add_action_noise(&a, 0.0, &[-1.0; 2], &[1.0; 2], NoiseMode::Additive, &mut r), a);
        assert_eq!(add_observation_noise(&a, 0.0, NoiseMode::Additive, &mut r), a);
    }

    #[test]
    fn action_noise_stays_in_bounds() {
        let mut r = rng_from(1);
        for _ in 0..1000 {
            let a = add_action_noise(&[0.0], 0.25, &[-0.1], &[0.1], NoiseMode::Additive, &mut r);
            assert!((-0.1..=0.1).contains(&a[0]));
        }
    }

    #[test]
    fn action_noise_std_matches_level() {
        let mut r = rng_from(2);
        let d: Vec<f64> = (0..100_000)
            .map(|_| add_action_noise(&[0.0], 0.1, &[-10.0], &[10.0], NoiseMode::Additive, &mut r)[0])
            .collect();
        let s = empirical_std(&d);
        assert!((s - 0.1).abs() <= 0.005, "std {s}");
    }

    #[test]
    fn observation_noise_std_matches_level() {
        let mut r = rng_from(3);
        let d: Vec<f64> = (0..100_000)
            .map(|_| add_observation_noise(&[1.5], 0.05, NoiseMode::Additive, &mut r)[0] - 1.5)
            .collect();
        let s = empirical_std(&d);
        assert!((s - 0.05).abs() <= 0.003, "std {s}");
    }

    #[test]
    fn multiplicative_mode_scales_with_magnitude() {
        let mut r = rng_from(4);
        assert_eq!(add_observation_noise(&[0.0], 0.5, NoiseMode::Multiplicative, &mut r), vec![0.0]);
        let d: Vec<f64> = (0..50_000)
            .map(|_| add_observation_noise(&[2.0], 0.1, NoiseMode::Multiplicative, &mut r)[0] - 2.0)
            .collect();
        assert!((empirical_std(&d) - 0.2).abs() < 0.01);
    }
}
