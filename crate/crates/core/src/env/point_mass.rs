use alloc::vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{ContinuousDynamics, Task};
use crate::State;

/// Point in the square `[-1, 1]²` driven by a continuous force in
/// `[-1, 1]²`, with velocity damping. State is `[x, y, vx, vy]`; the target is
/// a disc around `(0.7, 0.7)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointMass {
    bounds: [(f64, f64); 2],
}

impl PointMass {
    pub const DAMPING: f64 = 0.9;
    pub const ACCELERATION: f64 = 0.02;
    pub const TARGET: [f64; 2] = [0.7, 0.7];
    pub const TARGET_RADIUS: f64 = 0.15;

    pub fn new() -> Self {
        Self {
            bounds: [(-1.0, 1.0), (-1.0, 1.0)],
        }
    }
}

impl Default for PointMass {
    fn default() -> Self {
        Self::new()
    }
}

impl Task for PointMass {
    fn state_dim(&self) -> usize {
        4
    }

    fn horizon(&self) -> usize {
        100
    }

    fn start_state(&self, rng: &mut ChaCha8Rng) -> State {
        vec![
            -0.8 + rng.gen_range(-0.05..0.05),
            -0.8 + rng.gen_range(-0.05..0.05),
            0.0,
            0.0,
        ]
    }

    fn in_target(&self, state: &[f64]) -> bool {
        let dx = state[0] - Self::TARGET[0];
        let dy = state[1] - Self::TARGET[1];
        dx * dx + dy * dy <= Self::TARGET_RADIUS * Self::TARGET_RADIUS
    }
}

impl ContinuousDynamics for PointMass {
    fn action_bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    fn transition_continuous(&self, state: &[f64], action: &[f64]) -> State {
        let mut next = vec![0.0; 4];
        for axis in 0..2 {
            let force = action[axis].clamp(self.bounds[axis].0, self.bounds[axis].1);
            let mut velocity = Self::DAMPING * state[2 + axis] + Self::ACCELERATION * force;
            let mut position = state[axis] + velocity;
            if !(-1.0..=1.0).contains(&position) {
                position = position.clamp(-1.0, 1.0);
                velocity = 0.0;
            }
            next[axis] = position;
            next[2 + axis] = velocity;
        }
        next
    }
}
