use alloc::vec;
use alloc::vec::Vec;

use super::{check_transition, AgentConfig, AgentError, Transition, UpdateSummary};
use crate::env::StateDiscretizer;

/// Q-table over the cells of a [`StateDiscretizer`].
#[derive(Debug, Clone, PartialEq)]
pub struct TabularQ {
    discretizer: StateDiscretizer,
    action_count: usize,
    table: Vec<f64>,
    learning_rate: f64,
    gamma: f64,
}

impl TabularQ {
    pub fn new(discretizer: StateDiscretizer, action_count: usize, cfg: &AgentConfig) -> Self {
        let cells = discretizer.cell_count();
        Self {
            discretizer,
            action_count,
            table: vec![cfg.q_init; cells * action_count],
            learning_rate: cfg.learning_rate,
            gamma: cfg.gamma,
        }
    }

    pub fn action_count(&self) -> usize {
        self.action_count
    }

    pub fn cell_count(&self) -> usize {
        self.discretizer.cell_count()
    }

    pub fn discretizer(&self) -> &StateDiscretizer {
        &self.discretizer
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    /// Replaces the table wholesale (snapshot restore).
    pub fn set_table(&mut self, table: Vec<f64>) -> Result<(), AgentError> {
        if table.len() != self.table.len() {
            return Err(AgentError::InvalidConfig("table size does not match discretizer"));
        }
        if table.iter().any(|v| !v.is_finite()) {
            return Err(AgentError::NonFiniteTarget);
        }
        self.table = table;
        Ok(())
    }

    pub fn cell(&self, state: &[f64]) -> Result<usize, AgentError> {
        self.discretizer.index(state).ok_or(AgentError::StateNotIndexable)
    }

    pub fn action_values(&self, state: &[f64]) -> Result<&[f64], AgentError> {
        let c = self.cell(state)?;
        Ok(&self.table[c * self.action_count..(c + 1) * self.action_count])
    }

    pub fn value(&self, cell: usize, action: usize) -> f64 {
        self.table[cell * self.action_count + action]
    }

    /// `Q(s,a) += lr * (r + gamma * max Q(s',·) - Q(s,a))` for each transition
    /// in order; the bootstrap term is dropped at episode end.
    pub fn update(&mut self, batch: &[Transition]) -> Result<UpdateSummary, AgentError> {
        if batch.is_empty() {
            return Err(AgentError::EmptyBatch);
        }
        let mut abs_td = 0.0;
        for t in batch {
            check_transition(t, self.action_count)?;
            let target = if t.episode_end {
                t.reward
            } else {
                let next = self.action_values(&t.next_state)?;
                t.reward + self.gamma * next.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            };
            if !target.is_finite() {
                return Err(AgentError::NonFiniteTarget);
            }
            let idx = self.cell(&t.state)? * self.action_count + t.action;
            let td = target - self.table[idx];
            self.table[idx] += self.learning_rate * td;
            abs_td += td.abs();
        }
        Ok(UpdateSummary {
            mean_abs_td_error: abs_td / batch.len() as f64,
            transitions: batch.len(),
        })
    }
}
