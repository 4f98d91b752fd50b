use alloc::vec;

use rand_chacha::ChaCha8Rng;

use super::{Dynamics, EnvError, StateDiscretizer, Task};
use crate::State;

/// 1-D chain of `n` cells. Action 0 moves left, 1 moves right; the agent
/// starts in cell 0 and the target is cell `n - 1`. The state is the cell
/// index normalised to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainWorld {
    cells: usize,
}

impl ChainWorld {
    pub const LEFT: usize = 0;
    pub const RIGHT: usize = 1;

    pub fn new(cells: usize) -> Result<Self, EnvError> {
        if cells < 2 {
            return Err(EnvError::InvalidParameters("chain needs at least 2 cells"));
        }
        Ok(Self { cells })
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn encode(&self, cell: usize) -> State {
        vec![cell as f64 / (self.cells - 1) as f64]
    }

    pub fn cell_of(&self, state: &[f64]) -> usize {
        let x = state[0] * (self.cells - 1) as f64;
        (libm::round(x).max(0.0) as usize).min(self.cells - 1)
    }
}

impl Task for ChainWorld {
    fn state_dim(&self) -> usize {
        1
    }

    fn horizon(&self) -> usize {
        self.cells + 10
    }

    fn start_state(&self, _rng: &mut ChaCha8Rng) -> State {
        self.encode(0)
    }

    fn in_target(&self, state: &[f64]) -> bool {
        self.cell_of(state) == self.cells - 1
    }

    fn discretizer(&self) -> Option<StateDiscretizer> {
        Some(StateDiscretizer::unit_lattice(&[self.cells]))
    }
}

impl Dynamics for ChainWorld {
    fn action_count(&self) -> usize {
        2
    }

    fn transition(&self, state: &[f64], action: usize) -> State {
        let cell = self.cell_of(state);
        let next = match action {
            Self::LEFT => cell.saturating_sub(1),
            _ => (cell + 1).min(self.cells - 1),
        };
        self.encode(next)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{Environment, Simulator};

    #[test]
    fn starts_leftmost_and_moves_right() {
        let mut env = Simulator::new(ChainWorld::new(20).unwrap());
        assert_eq!(env.reset(99), vec![0.0]);
        assert_eq!(env.spec().horizon, 30);
        let chain = ChainWorld::new(20).unwrap();
        for i in 0..19 {
            let next = chain.transition(&chain.encode(i), ChainWorld::RIGHT);
            assert_eq!(next, chain.encode(i + 1));
        }
        assert_eq!(chain.transition(&chain.encode(19), ChainWorld::RIGHT), chain.encode(19));
        assert_eq!(chain.transition(&chain.encode(0), ChainWorld::LEFT), chain.encode(0));
    }
}
