//! Epsilon-greedy Q-learning on the reconstructed reward.
//!
//! Tabular when the environment enumerates its states, otherwise a small
//! network with a periodically synced target copy.

mod approx;
mod tabular;

use alloc::vec::Vec;

use rand::Rng;

pub use approx::DeepQ;
pub use tabular::TabularQ;

use crate::env::StateDiscretizer;
use crate::numcore::NetError;
use crate::State;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AgentError {
    #[error("non-finite TD target")]
    NonFiniteTarget,
    #[error("non-finite reward {0}")]
    NonFiniteReward(f64),
    #[error("action {action} out of range (action count {count})")]
    ActionOutOfRange { action: usize, count: usize },
    #[error("state cannot be mapped to a table cell")]
    StateNotIndexable,
    #[error("update called with an empty batch")]
    EmptyBatch,
    #[error("invalid agent configuration: {0}")]
    InvalidConfig(&'static str),
    #[error(transparent)]
    Net(#[from] NetError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: State,
    pub action: usize,
    pub reward: f64,
    pub next_state: State,
    /// Drops the bootstrap term.
    pub episode_end: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct AgentConfig {
    pub gamma: f64,
    /// Tabular step size.
    pub learning_rate: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Fraction of the training budget over which epsilon decays linearly.
    pub epsilon_decay_fraction: f64,
    /// Initial table value (optimistic values drive exploration).
    pub q_init: f64,
    /// Approximate variant: hidden layer sizes.
    pub hidden: Vec<usize>,
    /// Approximate variant: Adam step size.
    pub net_learning_rate: f64,
    /// Approximate variant: gradient updates between target syncs.
    pub target_sync: usize,
    pub buffer_capacity: usize,
    pub minibatch_size: usize,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            learning_rate: 0.5,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_decay_fraction: 0.3,
            q_init: 0.0,
            hidden: alloc::vec![64, 64],
            net_learning_rate: 1e-3,
            target_sync: 500,
            buffer_capacity: 50_000,
            minibatch_size: 32,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<(), AgentError> {
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(AgentError::InvalidConfig("gamma must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.epsilon_start) || !(0.0..=1.0).contains(&self.epsilon_end) {
            return Err(AgentError::InvalidConfig("epsilon must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.epsilon_decay_fraction) {
            return Err(AgentError::InvalidConfig("epsilon_decay_fraction must lie in [0, 1]"));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate <= 1.0) {
            return Err(AgentError::InvalidConfig("learning_rate must lie in [0, 1]"));
        }
        if !self.q_init.is_finite() {
            return Err(AgentError::InvalidConfig("q_init must be finite"));
        }
        if self.target_sync == 0 || self.minibatch_size == 0 || self.buffer_capacity == 0 {
            return Err(AgentError::InvalidConfig(
                "target_sync, minibatch_size and buffer_capacity must be >= 1",
            ));
        }
        Ok(())
    }

    pub fn schedule(&self, total_steps: usize) -> EpsilonSchedule {
        EpsilonSchedule {
            start: self.epsilon_start,
            end: self.epsilon_end,
            decay_steps: libm::round(self.epsilon_decay_fraction * total_steps as f64) as usize,
        }
    }
}

/// Linear decay from `start` to `end` over `decay_steps`, then constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    pub decay_steps: usize,
}

impl EpsilonSchedule {
    pub fn value(&self, step: usize) -> f64 {
        if step >= self.decay_steps {
            return self.end;
        }
        let t = step as f64 / self.decay_steps as f64;
        self.start + (self.end - self.start) * t
    }
}

/// Index of the largest value; ties go to the lowest index.
pub fn greedy(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Uniform random action with probability `epsilon`, greedy otherwise.
pub fn epsilon_greedy<R: Rng + ?Sized>(values: &[f64], epsilon: f64, rng: &mut R) -> usize {
    if epsilon > 0.0 && rng.gen::<f64>() < epsilon {
        rng.gen_range(0..values.len())
    } else {
        greedy(values)
    }
}

/// Summary of one update: mean absolute TD error over the batch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateSummary {
    pub mean_abs_td_error: f64,
    pub transitions: usize,
}

/// A Q-learning policy of either flavour.
#[derive(Debug, Clone, PartialEq)]
pub enum QAgent {
    Tabular(TabularQ),
    Approx(DeepQ),
}

impl QAgent {
    /// Tabular if a discretizer is available, otherwise a network.
    pub fn for_env<R: Rng + ?Sized>(
        discretizer: Option<StateDiscretizer>,
        state_dim: usize,
        action_count: usize,
        cfg: &AgentConfig,
        rng: &mut R,
    ) -> Result<Self, AgentError> {
        cfg.validate()?;
        Ok(match discretizer {
            Some(d) => QAgent::Tabular(TabularQ::new(d, action_count, cfg)),
            None => QAgent::Approx(DeepQ::new(state_dim, action_count, cfg, rng)?),
        })
    }

    pub fn action_count(&self) -> usize {
        match self {
            QAgent::Tabular(q) => q.action_count(),
            QAgent::Approx(q) => q.action_count(),
        }
    }

    pub fn action_values(&self, state: &[f64]) -> Result<Vec<f64>, AgentError> {
        match self {
            QAgent::Tabular(q) => q.action_values(state).map(<[f64]>::to_vec),
            QAgent::Approx(q) => q.action_values(state),
        }
    }

    pub fn select_action<R: Rng + ?Sized>(&self, state: &[f64], epsilon: f64, rng: &mut R) -> Result<usize, AgentError> {
        Ok(epsilon_greedy(&self.action_values(state)?, epsilon, rng))
    }

    pub fn greedy_action(&self, state: &[f64]) -> Result<usize, AgentError> {
        Ok(greedy(&self.action_values(state)?))
    }

    /// Feeds one transition to the learner (tabular: immediate update;
    /// approximate: buffer it and update on a sampled minibatch).
    pub fn observe<R: Rng + ?Sized>(&mut self, transition: Transition, rng: &mut R) -> Result<Option<UpdateSummary>, AgentError> {
        match self {
            QAgent::Tabular(q) => q.update(core::slice::from_ref(&transition)).map(Some),
            QAgent::Approx(q) => q.observe(transition, rng),
        }
    }

    pub fn update(&mut self, batch: &[Transition]) -> Result<UpdateSummary, AgentError> {
        match self {
            QAgent::Tabular(q) => q.update(batch),
            QAgent::Approx(q) => q.update(batch),
        }
    }
}

fn check_transition(t: &Transition, action_count: usize) -> Result<(), AgentError> {
    if t.action >= action_count {
        return Err(AgentError::ActionOutOfRange {
            action: t.action,
            count: action_count,
        });
    }
    if !t.reward.is_finite() {
        return Err(AgentError::NonFiniteReward(t.reward));
    }
    Ok(())
}
