use serde::{Deserialize, Serialize};

use crate::envs::noise::{add_action_noise, add_observation_noise, NoiseMode};
use crate::envs::Environment;
use crate::error::{Error, Result};
use crate::nets::Actor;
use crate::rng::{self, streams};
use crate::scalar::Scalar;

/// Undiscounted returns of one evaluation round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub step: u64,
    pub returns: Vec<f64>,
    pub mean: f64,
    /// Population standard deviation over episodes.
    pub std: f64,
}

impl EvalRecord {
    pub fn from_returns(step: u64, returns: Vec<f64>) -> Self {
        let (mean, std) = mean_std(&returns);
        Self { step, returns, mean, std }
    }
}

pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseTarget {
    Action,
    Observation,
}

impl std::str::FromStr for NoiseTarget {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "action" => Ok(NoiseTarget::Action),
            "observation" => Ok(NoiseTarget::Observation),
            other => Err(format!("unknown noise kind `{other}` (expected action or observation)")),
        }
    }
}

impl std::fmt::Display for NoiseTarget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NoiseTarget::Action => "action",
            NoiseTarget::Observation => "observation",
        })
    }
}

/// Test-time perturbation of actions or observations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub target: NoiseTarget,
    pub level: f64,
    pub mode: NoiseMode,
}

/// Runs `episodes` episodes with the deterministic policy.
///
/// Episode `e` resets from a seed derived from `(seed, e)` alone, so every
/// evaluation of a run sees the same initial states.
pub fn evaluate<T: Scalar>(
    actor: &Actor<T>,
    env: &mut dyn Environment,
    episodes: usize,
    seed: u64,
    step: u64,
    noise: Option<NoiseSpec>,
) -> Result<EvalRecord> {
    let spec = env.spec().clone();
    if actor.obs_dim() != spec.obs_dim || actor.act_dim() != spec.act_dim {
        return Err(Error::dim(
            "evaluate",
            format!("{}/{}", spec.obs_dim, spec.act_dim),
            format!("{}/{}", actor.obs_dim(), actor.act_dim()),
        ));
    }
    let reset_base = rng::derive(seed, streams::EVAL_RESET);
    let mut noise_rng = rng::stream(seed, streams::EVAL_NOISE);
    let mut returns = Vec::with_capacity(episodes);
    for e in 0..episodes as u64 {
        let mut obs = env.reset(rng::derive(reset_base, e));
        let mut total = 0.0;
        loop {
            if let Some(n) = noise.filter(|n| n.target == NoiseTarget::Observation) {
                obs = add_observation_noise(&obs, n.level, n.mode, &mut noise_rng);
            }
            let input: Vec<T> = obs.iter().map(|&v| T::lit(v)).collect();
            let mut action: Vec<f64> = actor.act(&input)?.iter().map(|v| v.as_f64()).collect();
            if let Some(n) = noise.filter(|n| n.target == NoiseTarget::Action) {
                action = add_action_noise(&action, n.level, &spec.action_low, &spec.action_high, n.mode, &mut noise_rng);
            }
            let r = env.step(&action)?;
            total += r.reward;
            obs = r.next_obs;
            if r.done || r.truncated {
                break;
            }
        }
        returns.push(total);
    }
    Ok(EvalRecord::from_returns(step, returns))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::make_env;
    use crate::envs::pendulum::Pendulum;
    use crate::nets::{ActionScale, ArchitectureConfig, PolicyKind};

    fn zero_actor() -> Actor<f64> {
        let mut a = Actor::build(
            &ArchitectureConfig::mlp(4, PolicyKind::Deterministic),
            3,
            ActionScale::symmetric(1, 2.0),
            0,
        )
        .unwrap();
        for p in a.params_mut() {
            p.value.fill(0.0);
        }
        a
    }

    #[test]
    fn zero_action_return_is_negative() {
        let mut env = make_env("pendulum").unwrap();
        let rec = evaluate(&zero_actor(), env.as_mut(), 3, 0, 0, None).unwrap();
        assert!(rec.returns.iter().all(|&r| r < 0.0));
    }

    #[test]
    fn single_episode_has_zero_std() {
        let mut env = make_env("pendulum").unwrap();
        let rec = evaluate(&zero_actor(), env.as_mut(), 1, 4, 0, None).unwrap();
        assert_eq!(rec.std, 0.0);
        assert_eq!(rec.returns.len(), 1);
    }

    #[test]
    fn zero_noise_matches_clean_evaluation() {
        let mut env = make_env("pendulum").unwrap();
        let actor = Actor::build(
            &ArchitectureConfig::mlp(4, PolicyKind::Deterministic),
            3,
            ActionScale::symmetric(1, 2.0),
            11,
        )
        .unwrap();
        let clean = evaluate(&actor, env.as_mut(), 4, 2, 0, None).unwrap();
        for target in [NoiseTarget::Action, NoiseTarget::Observation] {
            let spec = NoiseSpec {
                target,
                level: 0.0,
                mode: NoiseMode::Additive,
            };
            assert_eq!(evaluate(&actor, env.as_mut(), 4, 2, 0, Some(spec)).unwrap(), clean);
        }
    }

    #[test]
    fn energy_pumping_beats_doing_nothing() {
        // Scripted swing-up: push along the angular velocity until the
        // pendulum is near upright, then a PD catch.
        let mut env = Pendulum::new();
        let mut scripted = 0.0;
        let mut idle = 0.0;
        for e in 0..5 {
            for (policy, total) in [(true, &mut scripted), (false, &mut idle)] {
                let mut obs = env.reset(e);
                loop {
                    let (c, s, w) = (obs[0], obs[1], obs[2]);
                    let theta = s.atan2(c);
                    let u = if !policy {
                        0.0
                    } else if c > 0.85 {
                        (-10.0 * theta - 2.0 * w).clamp(-2.0, 2.0)
                    } else if w >= 0.0 {
                        2.0
                    } else {
                        -2.0
                    };
                    let r = env.step(&[u]).unwrap();
                    *total += r.reward;
                    obs = r.next_obs;
                    if r.done || r.truncated {
                        break;
                    }
                }
            }
        }
        assert!(scripted > idle, "scripted {scripted} vs idle {idle}");
    }

    #[test]
    fn mean_std_recomputes() {
        let rec = EvalRecord::from_returns(5, vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(rec.mean, 2.5);
        assert!((rec.std - 1.25f64.sqrt()).abs() < 1e-15);
    }
}
