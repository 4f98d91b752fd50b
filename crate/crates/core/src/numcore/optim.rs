use alloc::vec::Vec;

use super::{FeedForwardNet, Gradients, NetError};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case", tag = "kind"))]
pub enum OptimizerKind {
    Sgd,
    Adam { beta1: f64, beta2: f64, epsilon: f64 },
}

impl OptimizerKind {
    pub const fn adam() -> Self {
        OptimizerKind::Adam {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl Default for OptimizerKind {
    fn default() -> Self {
        Self::adam()
    }
}

/// Optimizer state for one network: moment estimates laid out like the
/// flattened parameters (weights of every layer, then biases of every layer).
#[derive(Debug, Clone, PartialEq)]
pub struct Optimizer {
    kind: OptimizerKind,
    learning_rate: f64,
    first_moment: Vec<f64>,
    second_moment: Vec<f64>,
    step: u64,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, learning_rate: f64) -> Self {
        Self {
            kind,
            learning_rate,
            first_moment: Vec::new(),
            second_moment: Vec::new(),
            step: 0,
        }
    }

    pub fn adam(learning_rate: f64) -> Self {
        Self::new(OptimizerKind::adam(), learning_rate)
    }

    pub fn sgd(learning_rate: f64) -> Self {
        Self::new(OptimizerKind::Sgd, learning_rate)
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    pub fn kind(&self) -> OptimizerKind {
        self.kind
    }

    /// Moves every parameter against its gradient. Refuses the whole update
    /// if any gradient entry is non-finite.
    pub fn apply(&mut self, net: &mut FeedForwardNet, grads: &Gradients) -> Result<(), NetError> {
        if !grads.matches(net) {
            return Err(NetError::InvalidLayout);
        }
        if let Some(layer) = grads.first_non_finite_layer() {
            return Err(NetError::NonFinite { layer: Some(layer) });
        }
        self.step += 1;
        let lr = self.learning_rate;
        let (weights, biases) = net.params_mut();
        let params = weights
            .iter_mut()
            .map(|w| w.as_mut_slice())
            .chain(biases.iter_mut().map(Vec::as_mut_slice));
        let grad_slices = grads
            .weights
            .iter()
            .map(|w| w.as_slice())
            .chain(grads.biases.iter().map(Vec::as_slice));

        match self.kind {
            OptimizerKind::Sgd => {
                for (p, g) in params.zip(grad_slices) {
                    for (pi, gi) in p.iter_mut().zip(g) {
                        *pi -= lr * gi;
                    }
                }
            }
            OptimizerKind::Adam {
                beta1,
                beta2,
                epsilon,
            } => {
                let total = net_param_len(grads);
                if self.first_moment.len() != total {
                    self.first_moment.clear();
                    self.first_moment.resize(total, 0.0);
                    self.second_moment.clear();
                    self.second_moment.resize(total, 0.0);
                }
                let t = self.step as f64;
                let bias1 = 1.0 - libm::pow(beta1, t);
                let bias2 = 1.0 - libm::pow(beta2, t);
                let mut offset = 0;
                for (p, g) in params.zip(grad_slices) {
                    let m = &mut self.first_moment[offset..offset + p.len()];
                    let v = &mut self.second_moment[offset..offset + p.len()];
                    for (((pi, gi), mi), vi) in p.iter_mut().zip(g).zip(m).zip(v) {
                        *mi = beta1 * *mi + (1.0 - beta1) * gi;
                        *vi = beta2 * *vi + (1.0 - beta2) * gi * gi;
                        let m_hat = *mi / bias1;
                        let v_hat = *vi / bias2;
                        *pi -= lr * m_hat / (libm::sqrt(v_hat) + epsilon);
                    }
                    offset += p.len();
                }
            }
        }
        Ok(())
    }
}

fn net_param_len(grads: &Gradients) -> usize {
    grads
        .weights
        .iter()
        .map(|w| w.as_slice().len())
        .chain(grads.biases.iter().map(Vec::len))
        .sum()
}
