use std::f64::consts::PI;

use rand::Rng;

use super::{EnvSpec, Environment, EpisodeClock, StepResult};
use crate::error::Result;
use crate::rng;

/// Torque-limited pendulum swing-up.
///
/// Rod of mass `m`, length `l`, pivoting freely; `θ = 0` is upright. With
/// torque `u`:
///
/// ```text
/// θ̇ ← clip(θ̇ + (3g/(2l) sin θ + 3/(m l²) u) dt, ±max_speed)
/// θ  ← θ + θ̇ dt
/// r  = −(norm(θ)² + 0.1 θ̇² + 0.001 u²)        (from the pre-step state)
/// ```
///
/// `norm` wraps to `[−π, π)`. Observations are `(cos θ, sin θ, θ̇)`. Episodes
/// start hanging down, `θ ~ π + U(−0.25, 0.25)`, `θ̇ ~ U(−0.25, 0.25)`, and run
/// 200 steps with no terminal state.
#[derive(Debug, Clone)]
pub struct Pendulum {
    spec: EnvSpec,
    pub theta: f64,
    pub theta_dot: f64,
    clock: EpisodeClock,
}

pub const GRAVITY: f64 = 10.0;
pub const MASS: f64 = 1.0;
pub const LENGTH: f64 = 1.0;
pub const DT: f64 = 0.05;
pub const MAX_SPEED: f64 = 8.0;
pub const MAX_TORQUE: f64 = 2.0;
pub const INIT_ANGLE_SPREAD: f64 = 0.25;
pub const INIT_SPEED_SPREAD: f64 = 0.25;

impl Default for Pendulum {
    fn default() -> Self {
        Self::new()
    }
}

impl Pendulum {
    pub fn new() -> Self {
        let constants = [
            ("gravity", GRAVITY),
            ("mass", MASS),
            ("length", LENGTH),
            ("max_speed", MAX_SPEED),
            ("max_torque", MAX_TORQUE),
        ]
        .into_iter()
        .collect();
        Self {
            spec: EnvSpec {
                name: "pendulum",
                obs_dim: 3,
                act_dim: 1,
                action_low: vec![-MAX_TORQUE],
                action_high: vec![MAX_TORQUE],
                max_episode_steps: 200,
                dt: DT,
                constants,
            },
            theta: PI,
            theta_dot: 0.0,
            clock: EpisodeClock::default(),
        }
    }

    /// Places the pendulum in an arbitrary state and starts an episode.
    pub fn set_state(&mut self, theta: f64, theta_dot: f64) -> Vec<f64> {
        self.theta = theta;
        self.theta_dot = theta_dot;
        self.clock.reset();
        self.observation()
    }

    pub fn observation(&self) -> Vec<f64> {
        vec![self.theta.cos(), self.theta.sin(), self.theta_dot]
    }

    /// Mechanical energy per unit moment of inertia, zero at the bottom rest
    /// position.
    pub fn energy(&self) -> f64 {
        0.5 * self.theta_dot * self.theta_dot + 1.5 * GRAVITY / LENGTH * (1.0 + self.theta.cos())
    }
}

pub fn normalize_angle(theta: f64) -> f64 {
    (theta + PI).rem_euclid(2.0 * PI) - PI
}

impl Environment for Pendulum {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        let mut r = rng::rng_from(seed);
        let theta = PI + r.random_range(-INIT_ANGLE_SPREAD..INIT_ANGLE_SPREAD);
        let theta_dot = r.random_range(-INIT_SPEED_SPREAD..INIT_SPEED_SPREAD);
        self.set_state(theta, theta_dot)
    }

    fn step(&mut self, action: &[f64]) -> Result<StepResult> {
        let u = self.clock.admit(&self.spec, action)?[0];
        let th = normalize_angle(self.theta);
        let reward = -(th * th + 0.1 * self.theta_dot * self.theta_dot + 0.001 * u * u);
        let accel = 1.5 * GRAVITY / LENGTH * self.theta.sin() + 3.0 / (MASS * LENGTH * LENGTH) * u;
        self.theta_dot = (self.theta_dot + accel * DT).clamp(-MAX_SPEED, MAX_SPEED);
        self.theta += self.theta_dot * DT;
        let truncated = self.clock.tick(&self.spec, false);
        Ok(StepResult {
            next_obs: self.observation(),
            reward,
            done: false,
            truncated,
        })
    }

    fn clip_events(&self) -> u64 {
        self.clock.clip_events
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reset_is_deterministic_and_on_the_unit_circle() {
        let mut env = Pendulum::new();
        let a = env.reset(42);
        let b = env.reset(42);
        assert_eq!(a, b);
        for seed in 0..50 {
            let o = env.reset(seed);
            assert!((o[0] * o[0] + o[1] * o[1] - 1.0).abs() < 1e-12);
            assert!(o[0] < -0.96, "starts hanging down");
        }
    }

    #[test]
    fn upright_rest_is_an_equilibrium() {
        let mut env = Pendulum::new();
        env.set_state(0.0, 0.0);
        let r = env.step(&[0.0]).unwrap();
        assert_eq!(r.reward, 0.0);
        assert_eq!((env.theta, env.theta_dot), (0.0, 0.0));
    }

    #[test]
    fn reward_is_never_positive() {
        let mut env = Pendulum::new();
        env.reset(1);
        let mut r = crate::rng::rng_from(9);
        for _ in 0..200 {
            let res = env.step(&[r.random_range(-2.0..2.0)]).unwrap();
            assert!(res.reward <= 0.0);
        }
    }

    #[test]
    fn torque_free_energy_drift_is_small() {
        // Semi-implicit Euler is symplectic: energy oscillates within a band
        // of width O(dt) but does not drift secularly.
        let mut env = Pendulum::new();
        env.set_state(PI / 2.0, 0.0);
        let e0 = env.energy();
        let mut band = 0.0f64;
        for _ in 0..200 {
            env.step(&[0.0]).unwrap();
            band = band.max((env.energy() - e0).abs() / e0);
        }
        let per_step = (env.energy() - e0).abs() / e0 / 200.0;
        assert!(per_step <= 1e-3, "drift per step {per_step}");
        let mut late_band = 0.0f64;
        for _ in 0..10 {
            env.set_state(env.theta, env.theta_dot);
            for _ in 0..200 {
                env.step(&[0.0]).unwrap();
                late_band = late_band.max((env.energy() - e0).abs() / e0);
            }
        }
        assert!(late_band <= 1.5 * band, "band grew from {band} to {late_band}");
    }

    #[test]
    fn angle_normalization() {
        assert!((normalize_angle(3.0 * PI) - (-PI)).abs() < 1e-12);
        assert!((normalize_angle(-0.5) + 0.5).abs() < 1e-15);
    }
}
