//! One-dimensional point mass that must be brought to rest at the origin.

use rand::Rng;

use super::{Environment, SimRng, StepInfo, StepOutcome, Termination};
use crate::sim::Vec3;

#[derive(Debug, Clone)]
pub struct PointMassEnv {
    pub dt: f64,
    pub max_steps: usize,
    /// Largest commanded acceleration, m/s^2.
    pub max_accel: f64,
    pub start_range: (f64, f64),
    x: f64,
    v: f64,
    steps: usize,
    done: bool,
}

impl Default for PointMassEnv {
    fn default() -> Self {
        Self {
            dt: 0.1,
            max_steps: 50,
            max_accel: 2.0,
            start_range: (2.0, 4.0),
            x: 0.0,
            v: 0.0,
            steps: 0,
            done: true,
        }
    }
}

impl PointMassEnv {
    pub fn deterministic(start: f64) -> Self {
        Self {
            start_range: (start, start),
            ..Self::default()
        }
    }
}

impl Environment for PointMassEnv {
    fn obs_dim(&self) -> usize {
        2
    }

    fn act_dim(&self) -> usize {
        1
    }

    fn reset(&mut self, rng: &mut SimRng) -> Vec<f64> {
        let (lo, hi) = self.start_range;
        self.x = lo + (hi - lo) * rng.random::<f64>();
        self.v = 0.0;
        self.steps = 0;
        self.done = false;
        vec![self.x, self.v]
    }

    fn step(&mut self, action: &[f64], _rng: &mut SimRng) -> StepOutcome {
        assert!(!self.done, "step called on a finished episode; call reset first");
        let a = action[0].clamp(-1.0, 1.0) * self.max_accel;
        self.x += self.v * self.dt + 0.5 * a * self.dt * self.dt;
        self.v += a * self.dt;
        self.steps += 1;
        let r2 = -0.1 * self.x.abs() - 0.05 * self.v.abs();
        self.done = self.steps >= self.max_steps;
        let r1 = if self.done && self.x.abs() < 0.1 && self.v.abs() < 0.1 { 1.0 } else { 0.0 };
        StepOutcome {
            obs: vec![self.x, self.v],
            reward: r1 + r2,
            r1,
            r2,
            done: self.done,
            cause: self.done.then_some(Termination::Timeout),
            info: self.info(),
        }
    }

    fn info(&self) -> StepInfo {
        StepInfo {
            position: Vec3::new(self.x, 0.0, 0.0),
            velocity: Vec3::new(self.v, 0.0, 0.0),
            glideslope: 0.0,
            fuel_used: 0.0,
            thrust: Vec3::zeros(),
        }
    }
}
