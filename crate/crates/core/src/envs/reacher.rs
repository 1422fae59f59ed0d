use rand::Rng;

use super::{EnvSpec, Environment, EpisodeClock, StepResult};
use crate::error::Result;
use crate::rng;

/// Planar point-mass reacher.
///
/// A unit mass under force `u ∈ [−1, 1]²` with linear drag:
///
/// ```text
/// v ← v + (u − c v) dt
/// p ← p + v dt
/// r = −‖t − p‖ − 0.01 ‖u‖²
/// ```
///
/// Observation: `(p, v, t, t − p)`, eight values. Start: `p ~ U(−0.1, 0.1)²`,
/// `v = 0`, target `t ~ U(−1, 1)²`. Leaving the arena `|p_i| > 2` terminates
/// the episode; limit 100 steps.
#[derive(Debug, Clone)]
pub struct Reacher {
    spec: EnvSpec,
    pub position: [f64; 2],
    pub velocity: [f64; 2],
    pub target: [f64; 2],
    clock: EpisodeClock,
}

pub const DT: f64 = 0.05;
pub const DRAG: f64 = 0.1;
pub const ARENA: f64 = 2.0;

impl Default for Reacher {
    fn default() -> Self {
        Self::new()
    }
}

impl Reacher {
    pub fn new() -> Self {
        let constants = [("drag", DRAG), ("arena_half_width", ARENA), ("mass", 1.0)]
            .into_iter()
            .collect();
        Self {
            spec: EnvSpec {
                name: "reacher",
                obs_dim: 8,
                act_dim: 2,
                action_low: vec![-1.0; 2],
                action_high: vec![1.0; 2],
                max_episode_steps: 100,
                dt: DT,
                constants,
            },
            position: [0.0; 2],
            velocity: [0.0; 2],
            target: [0.0; 2],
            clock: EpisodeClock::default(),
        }
    }

    pub fn set_state(&mut self, position: [f64; 2], velocity: [f64; 2], target: [f64; 2]) -> Vec<f64> {
        self.position = position;
        self.velocity = velocity;
        self.target = target;
        self.clock.reset();
        self.observation()
    }

    pub fn observation(&self) -> Vec<f64> {
        let [px, py] = self.position;
        let [vx, vy] = self.velocity;
        let [tx, ty] = self.target;
        vec![px, py, vx, vy, tx, ty, tx - px, ty - py]
    }

    fn distance(&self) -> f64 {
        let dx = self.target[0] - self.position[0];
        let dy = self.target[1] - self.position[1];
        dx.hypot(dy)
    }
}

impl Environment for Reacher {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        let mut r = rng::rng_from(seed);
        let p = [r.random_range(-0.1..0.1), r.random_range(-0.1..0.1)];
        let t = [r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)];
        self.set_state(p, [0.0; 2], t)
    }

    fn step(&mut self, action: &[f64]) -> Result<StepResult> {
        let u = self.clock.admit(&self.spec, action)?;
        for i in 0..2 {
            self.velocity[i] += (u[i] - DRAG * self.velocity[i]) * DT;
            self.position[i] += self.velocity[i] * DT;
        }
        let reward = -self.distance() - 0.01 * (u[0] * u[0] + u[1] * u[1]);
        let done = self.position.iter().any(|p| p.abs() > ARENA);
        let truncated = self.clock.tick(&self.spec, done);
        Ok(StepResult {
            next_obs: self.observation(),
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
    fn observation_layout() {
        let mut env = Reacher::new();
        let o = env.set_state([0.5, -0.5], [0.1, 0.2], [1.0, 1.0]);
        assert_eq!(o, vec![0.5, -0.5, 0.1, 0.2, 1.0, 1.0, 0.5, 1.5]);
    }

    #[test]
    fn resting_on_target_costs_nothing() {
        let mut env = Reacher::new();
        env.set_state([0.3, 0.3], [0.0, 0.0], [0.3, 0.3]);
        let r = env.step(&[0.0, 0.0]).unwrap();
        assert_eq!(r.reward, 0.0);
    }

    #[test]
    fn leaving_the_arena_terminates() {
        let mut env = Reacher::new();
        env.set_state([1.99, 0.0], [5.0, 0.0], [0.0, 0.0]);
        let r = env.step(&[1.0, 0.0]).unwrap();
        assert!(r.done && !r.truncated);
    }
}
