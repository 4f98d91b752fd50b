use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;

use super::{Dynamics, EnvError, StateDiscretizer, Task};
use crate::State;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridAction {
    Up = 0,
    Down = 1,
    Left = 2,
    Right = 3,
}

impl GridAction {
    pub const ALL: [GridAction; 4] = [Self::Up, Self::Down, Self::Left, Self::Right];

    fn delta(self) -> (isize, isize) {
        match self {
            Self::Up => (0, -1),
            Self::Down => (0, 1),
            Self::Left => (-1, 0),
            Self::Right => (1, 0),
        }
    }
}

/// Deterministic 4-action grid. Cell `(x, y)` has `x` growing to the right
/// and `y` growing downwards, so `(0, 0)` is the top-left corner. Moves into
/// a wall or off the grid leave the agent in place. The state is
/// `[x / (W - 1), y / (H - 1)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridWorld {
    width: usize,
    height: usize,
    walls: Vec<bool>,
    start: (usize, usize),
    goal: (usize, usize),
}

impl GridWorld {
    pub fn new(
        width: usize,
        height: usize,
        walls: Vec<bool>,
        start: (usize, usize),
        goal: (usize, usize),
    ) -> Result<Self, EnvError> {
        if width < 2 || height < 2 {
            return Err(EnvError::InvalidParameters("grid must be at least 2x2"));
        }
        if walls.len() != width * height {
            return Err(EnvError::InvalidParameters("wall mask does not match grid size"));
        }
        let inside = |(x, y): (usize, usize)| x < width && y < height;
        if !inside(start) || !inside(goal) {
            return Err(EnvError::InvalidParameters("start or goal outside the grid"));
        }
        if walls[start.1 * width + start.0] || walls[goal.1 * width + goal.0] {
            return Err(EnvError::InvalidParameters("start or goal on a wall"));
        }
        if start == goal {
            return Err(EnvError::InvalidParameters("start and goal coincide"));
        }
        Ok(Self {
            width,
            height,
            walls,
            start,
            goal,
        })
    }

    /// Wall-free grid, start top-left, goal bottom-right.
    pub fn open(width: usize, height: usize) -> Result<Self, EnvError> {
        Self::new(
            width,
            height,
            vec![false; width * height],
            (0, 0),
            (width.saturating_sub(1), height.saturating_sub(1)),
        )
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn start(&self) -> (usize, usize) {
        self.start
    }

    pub fn goal(&self) -> (usize, usize) {
        self.goal
    }

    pub fn is_wall(&self, x: usize, y: usize) -> bool {
        self.walls[y * self.width + x]
    }

    pub fn encode(&self, (x, y): (usize, usize)) -> State {
        vec![
            x as f64 / (self.width - 1) as f64,
            y as f64 / (self.height - 1) as f64,
        ]
    }

    pub fn cell_of(&self, state: &[f64]) -> (usize, usize) {
        let snap = |v: f64, n: usize| (libm::round(v * (n - 1) as f64).max(0.0) as usize).min(n - 1);
        (snap(state[0], self.width), snap(state[1], self.height))
    }

    pub fn move_from(&self, (x, y): (usize, usize), action: GridAction) -> (usize, usize) {
        let (dx, dy) = action.delta();
        let nx = x as isize + dx;
        let ny = y as isize + dy;
        if nx < 0 || ny < 0 || nx >= self.width as isize || ny >= self.height as isize {
            return (x, y);
        }
        let (nx, ny) = (nx as usize, ny as usize);
        if self.is_wall(nx, ny) {
            (x, y)
        } else {
            (nx, ny)
        }
    }
}

impl Task for GridWorld {
    fn state_dim(&self) -> usize {
        2
    }

    fn horizon(&self) -> usize {
        4 * (self.width + self.height)
    }

    fn start_state(&self, _rng: &mut ChaCha8Rng) -> State {
        self.encode(self.start)
    }

    fn in_target(&self, state: &[f64]) -> bool {
        self.cell_of(state) == self.goal
    }

    fn discretizer(&self) -> Option<StateDiscretizer> {
        Some(StateDiscretizer::unit_lattice(&[self.width, self.height]))
    }
}

impl Dynamics for GridWorld {
    fn action_count(&self) -> usize {
        4
    }

    fn transition(&self, state: &[f64], action: usize) -> State {
        let action = GridAction::ALL[action];
        self.encode(self.move_from(self.cell_of(state), action))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{Environment, Simulator};

    #[test]
    fn up_against_top_wall_stays_put() {
        let grid = GridWorld::open(10, 10).unwrap();
        let mut env = Simulator::new(grid);
        assert_eq!(env.reset(5), vec![0.0, 0.0]);
        let r = env.step(GridAction::Up as usize).unwrap();
        assert_eq!(r.next_state, vec![0.0, 0.0]);
        assert_eq!(env.spec().horizon, 80);
    }

    #[test]
    fn walls_block_movement() {
        let mut walls = vec![false; 9];
        walls[1] = true;
        let grid = GridWorld::new(3, 3, walls, (0, 0), (2, 2)).unwrap();
        assert_eq!(grid.move_from((0, 0), GridAction::Right), (0, 0));
        assert_eq!(grid.move_from((0, 0), GridAction::Down), (0, 1));
    }

    #[test]
    fn discretizer_is_bijective_on_cells() {
        let grid = GridWorld::open(7, 4).unwrap();
        let d = grid.discretizer().unwrap();
        let mut seen = alloc::collections::BTreeSet::new();
        for y in 0..4 {
            for x in 0..7 {
                assert!(seen.insert(d.index(&grid.encode((x, y))).unwrap()));
            }
        }
        assert_eq!(seen.len(), d.cell_count());
    }
}
