use rand::Rng;

use super::{EnvSpec, Environment, EpisodeClock, StepResult};
use crate::error::Result;
use crate::rng;

/// Continuous mountain car.
///
/// ```text
/// v ← clip(v + power·u − 0.0025 cos(3x), ±0.07)
/// x ← clip(x + v, [−1.2, 0.6]);  v ← 0 if x hit the left wall moving left
/// r = −0.1 u²  (+100 on reaching the goal)
/// ```
///
/// The episode terminates when `x ≥ 0.45` with `v ≥ 0`. Start: `x ~ U(−0.6,
/// −0.4)`, `v = 0`; limit 999 steps; `dt` is folded into the constants.
#[derive(Debug, Clone)]
pub struct MountainCar {
    spec: EnvSpec,
    pub position: f64,
    pub velocity: f64,
    clock: EpisodeClock,
}

pub const MIN_POSITION: f64 = -1.2;
pub const MAX_POSITION: f64 = 0.6;
pub const MAX_SPEED: f64 = 0.07;
pub const GOAL_POSITION: f64 = 0.45;
pub const POWER: f64 = 0.0015;

impl Default for MountainCar {
    fn default() -> Self {
        Self::new()
    }
}

impl MountainCar {
    pub fn new() -> Self {
        let constants = [
            ("min_position", MIN_POSITION),
            ("max_position", MAX_POSITION),
            ("max_speed", MAX_SPEED),
            ("goal_position", GOAL_POSITION),
            ("power", POWER),
        ]
        .into_iter()
        .collect();
        Self {
            spec: EnvSpec {
                name: "mountain-car",
                obs_dim: 2,
                act_dim: 1,
                action_low: vec![-1.0],
                action_high: vec![1.0],
                max_episode_steps: 999,
                dt: 1.0,
                constants,
            },
            position: -0.5,
            velocity: 0.0,
            clock: EpisodeClock::default(),
        }
    }

    pub fn set_state(&mut self, position: f64, velocity: f64) -> Vec<f64> {
        self.position = position;
        self.velocity = velocity;
        self.clock.reset();
        vec![position, velocity]
    }
}

impl Environment for MountainCar {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        let mut r = rng::rng_from(seed);
        self.set_state(r.random_range(-0.6..-0.4), 0.0)
    }

    fn step(&mut self, action: &[f64]) -> Result<StepResult> {
        let u = self.clock.admit(&self.spec, action)?[0];
        self.velocity = (self.velocity + u * POWER - 0.0025 * (3.0 * self.position).cos()).clamp(-MAX_SPEED, MAX_SPEED);
        self.position = (self.position + self.velocity).clamp(MIN_POSITION, MAX_POSITION);
        if self.position == MIN_POSITION && self.velocity < 0.0 {
            self.velocity = 0.0;
        }
        let done = self.position >= GOAL_POSITION && self.velocity >= 0.0;
        let reward = if done { 100.0 } else { 0.0 } - 0.1 * u * u;
        let truncated = self.clock.tick(&self.spec, done);
        Ok(StepResult {
            next_obs: vec![self.position, self.velocity],
            reward,
            done,
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
    fn reset_interval() {
        let mut env = MountainCar::new();
        for seed in 0..100 {
            let o = env.reset(seed);
            assert!((-0.6..=-0.4).contains(&o[0]));
            assert_eq!(o[1], 0.0);
        }
    }

    #[test]
    fn goal_terminates_with_bonus() {
        let mut env = MountainCar::new();
        env.set_state(0.44, 0.05);
        let r = env.step(&[1.0]).unwrap();
        assert!(r.done && !r.truncated);
        assert!((r.reward - 99.9).abs() < 1e-12);
    }

    #[test]
    fn left_wall_stops_the_car() {
        let mut env = MountainCar::new();
        env.set_state(-1.19, -0.07);
        env.step(&[-1.0]).unwrap();
        assert_eq!(env.position, MIN_POSITION);
        assert_eq!(env.velocity, 0.0);
    }

    #[test]
    fn bang_bang_pumping_reaches_the_goal() {
        let mut env = MountainCar::new();
        env.reset(0);
        let mut reached = false;
        for _ in 0..999 {
            let u = if env.velocity >= 0.0 { 1.0 } else { -1.0 };
            let r = env.step(&[u]).unwrap();
            if r.done {
                reached = true;
                break;
            }
        }
        assert!(reached);
    }
}
