use alloc::collections::VecDeque;
use alloc::vec::Vec;

use rand::Rng;

use super::{check_transition, AgentConfig, AgentError, Transition, UpdateSummary};
use crate::numcore::{Activation, FeedForwardNet, ForwardCache, Gradients, Optimizer};

/// Q-network with a frozen target copy and a transition buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct DeepQ {
    online: FeedForwardNet,
    target: FeedForwardNet,
    optimizer: Optimizer,
    buffer: VecDeque<Transition>,
    buffer_capacity: usize,
    minibatch_size: usize,
    target_sync: usize,
    gamma: f64,
    updates: u64,
    syncs: u64,
    target_evaluations: u64,
}

impl DeepQ {
    pub fn new<R: Rng + ?Sized>(
        state_dim: usize,
        action_count: usize,
        cfg: &AgentConfig,
        rng: &mut R,
    ) -> Result<Self, AgentError> {
        let mut sizes = Vec::with_capacity(cfg.hidden.len() + 2);
        sizes.push(state_dim);
        sizes.extend_from_slice(&cfg.hidden);
        sizes.push(action_count);
        let online = FeedForwardNet::new(&sizes, Activation::Relu, Activation::Identity, rng)?;
        Ok(Self::from_net(online, cfg))
    }

    /// Wraps an existing Q-network; the target starts as a copy.
    pub fn from_net(online: FeedForwardNet, cfg: &AgentConfig) -> Self {
        Self {
            target: online.clone(),
            online,
            optimizer: Optimizer::adam(cfg.net_learning_rate),
            buffer: VecDeque::new(),
            buffer_capacity: cfg.buffer_capacity,
            minibatch_size: cfg.minibatch_size,
            target_sync: cfg.target_sync,
            gamma: cfg.gamma,
            updates: 0,
            syncs: 0,
            target_evaluations: 0,
        }
    }

    pub fn action_count(&self) -> usize {
        self.online.output_len()
    }

    pub fn online(&self) -> &FeedForwardNet {
        &self.online
    }

    pub fn target(&self) -> &FeedForwardNet {
        &self.target
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    pub fn syncs(&self) -> u64 {
        self.syncs
    }

    /// Forward passes made through the target network to build TD targets.
    pub fn target_evaluations(&self) -> u64 {
        self.target_evaluations
    }

    pub fn buffered(&self) -> usize {
        self.buffer.len()
    }

    pub fn action_values(&self, state: &[f64]) -> Result<Vec<f64>, AgentError> {
        Ok(self.online.forward(state)?)
    }

    pub fn observe<R: Rng + ?Sized>(
        &mut self,
        transition: Transition,
        rng: &mut R,
    ) -> Result<Option<UpdateSummary>, AgentError> {
        check_transition(&transition, self.action_count())?;
        if self.buffer.len() == self.buffer_capacity {
            self.buffer.pop_front();
        }
        self.buffer.push_back(transition);
        if self.buffer.len() < self.minibatch_size {
            return Ok(None);
        }
        let batch: Vec<Transition> = (0..self.minibatch_size)
            .map(|_| self.buffer[rng.gen_range(0..self.buffer.len())].clone())
            .collect();
        self.update(&batch).map(Some)
    }

    /// One gradient step on the mean squared TD error of `batch`, with
    /// targets from the frozen network. Syncs the target every
    /// `target_sync` updates.
    pub fn update(&mut self, batch: &[Transition]) -> Result<UpdateSummary, AgentError> {
        if batch.is_empty() {
            return Err(AgentError::EmptyBatch);
        }
        let count = self.action_count();
        let mut grads = Gradients::zeros_like(&self.online);
        let mut cache = ForwardCache::default();
        let mut out_grad = alloc::vec![0.0; count];
        let mut abs_td = 0.0;
        let n = batch.len() as f64;
        for t in batch {
            check_transition(t, count)?;
            let target = if t.episode_end {
                t.reward
            } else {
                self.target_evaluations += 1;
                let next = self.target.forward(&t.next_state)?;
                t.reward + self.gamma * next.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            };
            if !target.is_finite() {
                return Err(AgentError::NonFiniteTarget);
            }
            let predicted = self.online.forward_cached(&t.state, &mut cache)?[t.action];
            let td = target - predicted;
            abs_td += td.abs();
            out_grad.fill(0.0);
            out_grad[t.action] = -2.0 * td / n;
            self.online.backward(&cache, &out_grad, &mut grads)?;
        }
        self.optimizer.apply(&mut self.online, &grads)?;
        self.updates += 1;
        if self.updates.is_multiple_of(self.target_sync as u64) {
            self.target.copy_params_from(&self.online);
            self.syncs += 1;
        }
        Ok(UpdateSummary {
            mean_abs_td_error: abs_td / n,
            transitions: batch.len(),
        })
    }
}
