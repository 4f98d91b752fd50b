use alloc::vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{Axis, Dynamics, StateDiscretizer, Task};
use crate::State;

/// Car on a one-dimensional hill with three throttle settings (push left,
/// coast, push right). State is `[position, velocity]`; the target is
/// `position >= 0.5`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MountainCar;

impl MountainCar {
    pub const MIN_POSITION: f64 = -1.2;
    pub const MAX_POSITION: f64 = 0.6;
    pub const MAX_SPEED: f64 = 0.07;
    pub const GOAL_POSITION: f64 = 0.5;
    pub const FORCE: f64 = 0.001;
    pub const GRAVITY: f64 = 0.0025;
    /// Bins per state dimension for tabular learners.
    pub const GRID: usize = 40;
}

impl Task for MountainCar {
    fn state_dim(&self) -> usize {
        2
    }

    fn horizon(&self) -> usize {
        200
    }

    fn start_state(&self, rng: &mut ChaCha8Rng) -> State {
        vec![rng.gen_range(-0.6..-0.4), 0.0]
    }

    fn in_target(&self, state: &[f64]) -> bool {
        state[0] >= Self::GOAL_POSITION
    }

    fn discretizer(&self) -> Option<StateDiscretizer> {
        Some(StateDiscretizer::new(vec![
            Axis {
                low: Self::MIN_POSITION,
                high: Self::MAX_POSITION,
                bins: Self::GRID,
            },
            Axis {
                low: -Self::MAX_SPEED,
                high: Self::MAX_SPEED,
                bins: Self::GRID,
            },
        ]))
    }
}

impl Dynamics for MountainCar {
    fn action_count(&self) -> usize {
        3
    }

    fn transition(&self, state: &[f64], action: usize) -> State {
        let (position, velocity) = (state[0], state[1]);
        let force = action as f64 - 1.0;
        let mut velocity = velocity + force * Self::FORCE - libm::cos(3.0 * position) * Self::GRAVITY;
        velocity = velocity.clamp(-Self::MAX_SPEED, Self::MAX_SPEED);
        let position = (position + velocity).clamp(Self::MIN_POSITION, Self::MAX_POSITION);
        if position == Self::MIN_POSITION && velocity < 0.0 {
            velocity = 0.0;
        }
        vec![position, velocity]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{Environment, Simulator};

    #[test]
    fn start_bounds_over_many_seeds() {
        let mut env = Simulator::new(MountainCar);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for seed in 0..1000 {
            let s = env.reset(seed);
            assert_eq!(s[1], 0.0);
            assert!((-0.6..=-0.4).contains(&s[0]));
            lo = lo.min(s[0]);
            hi = hi.max(s[0]);
        }
        // 1000 uniform draws cover the interval closely.
        assert!(lo < -0.59 && hi > -0.41);
    }

    #[test]
    fn full_throttle_matches_independent_update() {
        let car = MountainCar;
        let mut state = vec![-0.5, 0.0];
        let (mut p, mut v): (f64, f64) = (-0.5, 0.0);
        for _ in 0..150 {
            state = car.transition(&state, 2);
            v = v + 0.001 - 0.0025 * libm::cos(3.0 * p);
            v = v.max(-0.07).min(0.07);
            p += v;
            p = p.max(-1.2).min(0.6);
            if p == -1.2 && v < 0.0 {
                v = 0.0;
            }
            assert_eq!(state, vec![p, v]);
        }
    }
}
