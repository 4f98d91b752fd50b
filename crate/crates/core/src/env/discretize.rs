use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ContinuousDynamics, Dynamics, EnvError, StateDiscretizer, Task};
use crate::State;

/// A continuous-action task restricted to a fixed set of sampled action
/// vectors: discrete action `i` always executes `actions()[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Discretized<C> {
    inner: C,
    actions: Vec<Vec<f64>>,
}

/// Samples `count` action vectors uniformly inside the task's action box
/// under `seed` and exposes them as a discrete action set.
pub fn discretize_action_space<C: ContinuousDynamics>(
    inner: C,
    count: usize,
    seed: u64,
) -> Result<Discretized<C>, EnvError> {
    if count == 0 {
        return Err(EnvError::NoActions);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let actions = (0..count)
        .map(|_| {
            inner
                .action_bounds()
                .iter()
                .map(|&(lo, hi)| if lo < hi { rng.gen_range(lo..=hi) } else { lo })
                .collect()
        })
        .collect();
    Ok(Discretized { inner, actions })
}

impl<C> Discretized<C> {
    pub fn actions(&self) -> &[Vec<f64>] {
        &self.actions
    }

    pub fn inner(&self) -> &C {
        &self.inner
    }
}

impl<C: ContinuousDynamics> Task for Discretized<C> {
    fn state_dim(&self) -> usize {
        self.inner.state_dim()
    }

    fn horizon(&self) -> usize {
        self.inner.horizon()
    }

    fn gamma(&self) -> f64 {
        self.inner.gamma()
    }

    fn start_state(&self, rng: &mut ChaCha8Rng) -> State {
        self.inner.start_state(rng)
    }

    fn in_target(&self, state: &[f64]) -> bool {
        self.inner.in_target(state)
    }

    fn discretizer(&self) -> Option<StateDiscretizer> {
        self.inner.discretizer()
    }
}

impl<C: ContinuousDynamics> Dynamics for Discretized<C> {
    fn action_count(&self) -> usize {
        self.actions.len()
    }

    fn transition(&self, state: &[f64], action: usize) -> State {
        self.inner.transition_continuous(state, &self.actions[action])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{ContinuousSimulator, Environment, PointMass, Simulator};

    #[test]
    fn twenty_actions_deterministic_and_in_box() {
        let a = discretize_action_space(PointMass::new(), 20, 7).unwrap();
        let b = discretize_action_space(PointMass::new(), 20, 7).unwrap();
        assert_eq!(a.action_count(), 20);
        assert_eq!(a.actions(), b.actions());
        assert!(a.actions().iter().flatten().all(|v| (-1.0..=1.0).contains(v)));
        let c = discretize_action_space(PointMass::new(), 20, 8).unwrap();
        assert_ne!(a.actions(), c.actions());
    }

    #[test]
    fn zero_actions_rejected() {
        assert_eq!(
            discretize_action_space(PointMass::new(), 0, 1).unwrap_err(),
            EnvError::NoActions
        );
    }

    #[test]
    fn single_action_equals_constant_continuous_drive() {
        let wrapped = discretize_action_space(PointMass::new(), 1, 3).unwrap();
        let vector = wrapped.actions()[0].clone();
        let mut discrete = Simulator::new(wrapped);
        let mut direct = ContinuousSimulator::new(PointMass::new());
        assert_eq!(discrete.reset(11), direct.reset(11));
        for _ in 0..discrete.spec().horizon {
            assert_eq!(discrete.step(0).unwrap(), direct.step(&vector).unwrap());
        }
    }
}
