//! Deterministic fixed-horizon environments.
//!
//! Each concrete task only describes its dynamics ([`Dynamics`] or
//! [`ContinuousDynamics`]); [`Simulator`] owns the episode bookkeeping that is
//! common to all of them:
//!
//! * every episode lasts exactly `horizon` steps,
//! * the hidden reward is `+1` on the step that first enters the target
//!   region and `0` otherwise,
//! * once the target has been entered, the observation freezes and every
//!   remaining step returns that last state with reward `0`.

mod chain;
mod discretize;
mod grid;
mod mountain_car;
mod point_mass;

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use chain::ChainWorld;
pub use discretize::{discretize_action_space, Discretized};
pub use grid::{GridAction, GridWorld};
pub use mountain_car::MountainCar;
pub use point_mass::PointMass;

use crate::State;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvSpec {
    pub state_dim: usize,
    pub action_count: usize,
    pub horizon: usize,
    /// Discount applied when computing the hidden (evaluation) return.
    pub gamma: f64,
}

/// Outcome of one environment step. `true_reward` is the hidden task reward:
/// only expert training and evaluation may look at it.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub next_state: State,
    pub true_reward: f64,
    pub terminal_reached: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EnvError {
    #[error("action {action} out of range (action count {count})")]
    ActionOutOfRange { action: usize, count: usize },
    #[error("episode already ran its {horizon} steps")]
    PastHorizon { horizon: usize },
    #[error("step called before reset")]
    NotReset,
    #[error("action count must be at least 1")]
    NoActions,
    #[error("action vector has length {actual}, expected {expected}")]
    ActionDimension { expected: usize, actual: usize },
    #[error("invalid environment parameters: {0}")]
    InvalidParameters(&'static str),
}

/// Problem description shared by discrete- and continuous-action tasks.
pub trait Task {
    fn state_dim(&self) -> usize;
    fn horizon(&self) -> usize;
    fn gamma(&self) -> f64 {
        1.0
    }
    fn start_state(&self, rng: &mut ChaCha8Rng) -> State;
    fn in_target(&self, state: &[f64]) -> bool;
    /// Finite state enumeration for tabular learners, if the task has one.
    fn discretizer(&self) -> Option<StateDiscretizer> {
        None
    }
}

pub trait Dynamics: Task {
    fn action_count(&self) -> usize;
    fn transition(&self, state: &[f64], action: usize) -> State;
}

pub trait ContinuousDynamics: Task {
    /// Inclusive `(low, high)` bounds per action component.
    fn action_bounds(&self) -> &[(f64, f64)];
    fn transition_continuous(&self, state: &[f64], action: &[f64]) -> State;
}

/// Object-safe episode interface used by agents and the experiment harness.
pub trait Environment {
    fn spec(&self) -> EnvSpec;
    fn reset(&mut self, seed: u64) -> State;
    fn step(&mut self, action: usize) -> Result<StepResult, EnvError>;
    fn discretizer(&self) -> Option<StateDiscretizer>;
    /// Whether `state` lies inside the task's target region.
    fn is_target(&self, state: &[f64]) -> bool;
}

#[derive(Debug, Clone)]
struct Episode {
    state: State,
    steps: usize,
    terminal: bool,
}

impl Episode {
    fn start<T: Task + ?Sized>(task: &T, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let state = task.start_state(&mut rng);
        let terminal = task.in_target(&state);
        Self {
            state,
            steps: 0,
            terminal,
        }
    }

    fn advance<T: Task + ?Sized>(
        &mut self,
        task: &T,
        next: impl FnOnce(&[f64]) -> State,
    ) -> Result<StepResult, EnvError> {
        if self.steps >= task.horizon() {
            return Err(EnvError::PastHorizon {
                horizon: task.horizon(),
            });
        }
        self.steps += 1;
        if self.terminal {
            return Ok(StepResult {
                next_state: self.state.clone(),
                true_reward: 0.0,
                terminal_reached: true,
            });
        }
        self.state = next(&self.state);
        let mut true_reward = 0.0;
        if task.in_target(&self.state) {
            self.terminal = true;
            true_reward = 1.0;
        }
        Ok(StepResult {
            next_state: self.state.clone(),
            true_reward,
            terminal_reached: self.terminal,
        })
    }
}

/// Runs a discrete-action task as an [`Environment`].
#[derive(Debug, Clone)]
pub struct Simulator<D> {
    dynamics: D,
    episode: Option<Episode>,
}

impl<D: Dynamics> Simulator<D> {
    pub fn new(dynamics: D) -> Self {
        Self {
            dynamics,
            episode: None,
        }
    }

    pub fn dynamics(&self) -> &D {
        &self.dynamics
    }

    pub fn steps_taken(&self) -> usize {
        self.episode.as_ref().map_or(0, |e| e.steps)
    }
}

impl<D: Dynamics> Environment for Simulator<D> {
    fn spec(&self) -> EnvSpec {
        EnvSpec {
            state_dim: self.dynamics.state_dim(),
            action_count: self.dynamics.action_count(),
            horizon: self.dynamics.horizon(),
            gamma: self.dynamics.gamma(),
        }
    }

    fn reset(&mut self, seed: u64) -> State {
        let episode = Episode::start(&self.dynamics, seed);
        let state = episode.state.clone();
        self.episode = Some(episode);
        state
    }

    fn step(&mut self, action: usize) -> Result<StepResult, EnvError> {
        let count = self.dynamics.action_count();
        if action >= count {
            return Err(EnvError::ActionOutOfRange { action, count });
        }
        let episode = self.episode.as_mut().ok_or(EnvError::NotReset)?;
        let dynamics = &self.dynamics;
        episode.advance(dynamics, |s| dynamics.transition(s, action))
    }

    fn discretizer(&self) -> Option<StateDiscretizer> {
        self.dynamics.discretizer()
    }

    fn is_target(&self, state: &[f64]) -> bool {
        self.dynamics.in_target(state)
    }
}

/// Runs a continuous-action task directly, with the same episode rules as
/// [`Simulator`].
#[derive(Debug, Clone)]
pub struct ContinuousSimulator<C> {
    dynamics: C,
    episode: Option<Episode>,
}

impl<C: ContinuousDynamics> ContinuousSimulator<C> {
    pub fn new(dynamics: C) -> Self {
        Self {
            dynamics,
            episode: None,
        }
    }

    pub fn reset(&mut self, seed: u64) -> State {
        let episode = Episode::start(&self.dynamics, seed);
        let state = episode.state.clone();
        self.episode = Some(episode);
        state
    }

    pub fn step(&mut self, action: &[f64]) -> Result<StepResult, EnvError> {
        let expected = self.dynamics.action_bounds().len();
        if action.len() != expected {
            return Err(EnvError::ActionDimension {
                expected,
                actual: action.len(),
            });
        }
        let episode = self.episode.as_mut().ok_or(EnvError::NotReset)?;
        let dynamics = &self.dynamics;
        episode.advance(dynamics, |s| dynamics.transition_continuous(s, action))
    }
}

/// Uniform grid over a box of the state space; maps a state to a flat cell
/// index for tabular learners.
#[derive(Debug, Clone, PartialEq)]
pub struct StateDiscretizer {
    axes: Vec<Axis>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub low: f64,
    pub high: f64,
    pub bins: usize,
}

impl StateDiscretizer {
    pub fn new(axes: Vec<Axis>) -> Self {
        Self { axes }
    }

    /// Grid whose cells are centred on the lattice points `i / (n - 1)`,
    /// `i = 0..n`, of the unit interval (one axis per entry of `points`).
    pub fn unit_lattice(points: &[usize]) -> Self {
        let axes = points
            .iter()
            .map(|&n| {
                let half = if n > 1 { 0.5 / (n - 1) as f64 } else { 0.5 };
                Axis {
                    low: -half,
                    high: 1.0 + half,
                    bins: n,
                }
            })
            .collect();
        Self { axes }
    }

    pub fn cell_count(&self) -> usize {
        self.axes.iter().map(|a| a.bins).product()
    }

    pub fn state_dim(&self) -> usize {
        self.axes.len()
    }

    /// Row-major cell index; out-of-box values clamp to the border cells.
    pub fn index(&self, state: &[f64]) -> Option<usize> {
        if state.len() != self.axes.len() {
            return None;
        }
        let mut index = 0;
        for (axis, &x) in self.axes.iter().zip(state) {
            if !x.is_finite() {
                return None;
            }
            let t = (x - axis.low) / (axis.high - axis.low) * axis.bins as f64;
            let cell = if t <= 0.0 {
                0
            } else {
                (libm::floor(t) as usize).min(axis.bins - 1)
            };
            index = index * axis.bins + cell;
        }
        Some(index)
    }
}

/// Discounted return `Σ_{t=0}^{T-1} γ^t r_{t+1}` of one episode's rewards.
pub fn true_return(rewards: &[f64], gamma: f64) -> f64 {
    let mut total = 0.0;
    let mut discount = 1.0;
    for r in rewards {
        total += discount * r;
        discount *= gamma;
    }
    total
}

/// Agent-facing view of an environment: the hidden reward and the terminal
/// flag never leave this wrapper.
pub struct RewardFree<'a> {
    inner: &'a mut dyn Environment,
}

impl<'a> RewardFree<'a> {
    pub fn new(inner: &'a mut dyn Environment) -> Self {
        Self { inner }
    }

    pub fn spec(&self) -> EnvSpec {
        self.inner.spec()
    }

    pub fn reset(&mut self, seed: u64) -> State {
        self.inner.reset(seed)
    }

    pub fn step(&mut self, action: usize) -> Result<State, EnvError> {
        self.inner.step(action).map(|r| r.next_state)
    }
}
