//! The equality net: a binary classifier over ordered state pairs that
//! predicts whether the second state can be reached from the first within
//! `window_frame` steps. Trained on the agent's replay trajectories.

mod replay;
mod sampling;

use alloc::vec::Vec;

use rand::Rng;

pub use replay::ReplayBuffer;
pub use sampling::{sample_training_batch, LabeledPair, PairSource};

use crate::case_base::{CaseBase, SimilarityModel};
use crate::numcore::{
    binary_cross_entropy, Activation, FeedForwardNet, ForwardCache, Gradients, NetError, Optimizer,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EqualityError {
    #[error("insufficient replay diversity: need at least 2 trajectories, have {trajectories}")]
    InsufficientReplayDiversity { trajectories: usize },
    #[error("divergence pairs requested but the case base is empty")]
    EmptyCaseBase,
    #[error("trajectory of length {len} is too short (need at least 2 states)")]
    TrajectoryTooShort { len: usize },
    #[error("invalid equality-net configuration: {0}")]
    InvalidConfig(&'static str),
    #[error(transparent)]
    Net(#[from] NetError),
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct EqualityNetConfig {
    /// Maximum index gap of a positive (similar) pair.
    pub window_frame: usize,
    /// Agent-vs-expert divergence pairs per batch.
    pub nu: usize,
    /// Pairs per gradient update.
    pub batch_size: usize,
    /// Gradient updates after each completed episode.
    pub updates_per_episode: usize,
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    pub replay_capacity: usize,
    /// Also draw positives from adjacent stored expert states.
    pub train_on_expert: bool,
}

impl Default for EqualityNetConfig {
    fn default() -> Self {
        Self {
            window_frame: 5,
            nu: 8,
            batch_size: 32,
            updates_per_episode: 50,
            hidden: alloc::vec![64, 64],
            learning_rate: 1e-3,
            replay_capacity: 200,
            train_on_expert: false,
        }
    }
}

impl EqualityNetConfig {
    pub fn validate(&self) -> Result<(), EqualityError> {
        if self.window_frame == 0 {
            return Err(EqualityError::InvalidConfig("window_frame must be >= 1"));
        }
        if self.batch_size == 0 {
            return Err(EqualityError::InvalidConfig("batch_size must be >= 1"));
        }
        if self.nu > self.batch_size {
            return Err(EqualityError::InvalidConfig("nu must not exceed batch_size"));
        }
        if !(self.batch_size - self.nu).is_multiple_of(2) {
            return Err(EqualityError::InvalidConfig("batch_size - nu must be even"));
        }
        if self.replay_capacity < 2 {
            return Err(EqualityError::InvalidConfig("replay_capacity must be >= 2"));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(EqualityError::InvalidConfig("learning_rate must be finite and >= 0"));
        }
        Ok(())
    }
}

/// Pair classifier `E(s1, s2) ∈ [0, 1]` over the concatenation `s1 ++ s2`.
#[derive(Debug, Clone, PartialEq)]
pub struct EqualityNet {
    net: FeedForwardNet,
    state_dim: usize,
}

/// Reusable buffers for training; keeps the inner loop allocation-free.
#[derive(Debug, Default)]
struct Scratch {
    input: Vec<f64>,
    cache: ForwardCache,
}

impl EqualityNet {
    pub fn new<R: Rng + ?Sized>(state_dim: usize, hidden: &[usize], rng: &mut R) -> Result<Self, EqualityError> {
        let net = FeedForwardNet::new(&Self::layout(state_dim, hidden), Activation::Relu, Activation::Logistic, rng)?;
        Ok(Self { net, state_dim })
    }

    /// All-zero parameters: outputs exactly 0.5 everywhere.
    pub fn zeros(state_dim: usize, hidden: &[usize]) -> Result<Self, EqualityError> {
        let net = FeedForwardNet::zeros(&Self::layout(state_dim, hidden), Activation::Relu, Activation::Logistic)?;
        Ok(Self { net, state_dim })
    }

    pub fn from_net(net: FeedForwardNet) -> Result<Self, EqualityError> {
        if !net.input_len().is_multiple_of(2) || net.output_len() != 1 || net.output_activation() != Activation::Logistic {
            return Err(EqualityError::InvalidConfig(
                "equality net needs an even input width and a single logistic output",
            ));
        }
        Ok(Self {
            state_dim: net.input_len() / 2,
            net,
        })
    }

    fn layout(state_dim: usize, hidden: &[usize]) -> Vec<usize> {
        let mut sizes = Vec::with_capacity(hidden.len() + 2);
        sizes.push(2 * state_dim);
        sizes.extend_from_slice(hidden);
        sizes.push(1);
        sizes
    }

    pub fn net(&self) -> &FeedForwardNet {
        &self.net
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    fn check(&self, s: &[f64]) -> Result<(), NetError> {
        if s.len() != self.state_dim {
            return Err(NetError::DimensionMismatch {
                expected: self.state_dim,
                actual: s.len(),
            });
        }
        Ok(())
    }

    pub fn similarity(&self, first: &[f64], second: &[f64]) -> Result<f64, NetError> {
        self.check(first)?;
        self.check(second)?;
        let mut input = Vec::with_capacity(2 * self.state_dim);
        input.extend_from_slice(first);
        input.extend_from_slice(second);
        Ok(self.net.forward(&input)?[0])
    }

    /// One gradient step of mean binary cross-entropy over `pairs`.
    /// Returns the mean loss before the step.
    pub fn fit_batch(&mut self, pairs: &[LabeledPair], optimizer: &mut Optimizer) -> Result<f64, EqualityError> {
        let mut grads = Gradients::zeros_like(&self.net);
        let mut scratch = Scratch::default();
        self.fit_batch_with(pairs, optimizer, &mut grads, &mut scratch)
    }

    fn fit_batch_with(
        &mut self,
        pairs: &[LabeledPair],
        optimizer: &mut Optimizer,
        grads: &mut Gradients,
        scratch: &mut Scratch,
    ) -> Result<f64, EqualityError> {
        if pairs.is_empty() {
            return Ok(0.0);
        }
        grads.fill_zero();
        let mut total = 0.0;
        for pair in pairs {
            self.check(&pair.first)?;
            self.check(&pair.second)?;
            scratch.input.clear();
            scratch.input.extend_from_slice(&pair.first);
            scratch.input.extend_from_slice(&pair.second);
            let p = self.net.forward_cached(&scratch.input, &mut scratch.cache)?[0];
            let (loss, grad) = binary_cross_entropy(p, pair.label);
            total += loss;
            self.net.backward(&scratch.cache, &[grad], grads)?;
        }
        let n = pairs.len() as f64;
        grads.scale(1.0 / n);
        optimizer.apply(&mut self.net, grads)?;
        Ok(total / n)
    }
}

impl SimilarityModel for EqualityNet {
    fn similarity(&self, a: &[f64], b: &[f64]) -> Result<f64, NetError> {
        EqualityNet::similarity(self, a, b)
    }
}

/// Runs `updates` gradient steps, each on a freshly sampled batch. Returns the
/// per-update mean loss.
pub fn train_equality_net<R: Rng + ?Sized>(
    net: &mut EqualityNet,
    optimizer: &mut Optimizer,
    replay: &ReplayBuffer,
    case_base: &CaseBase,
    cfg: &EqualityNetConfig,
    updates: usize,
    rng: &mut R,
) -> Result<Vec<f64>, EqualityError> {
    let mut grads = Gradients::zeros_like(&net.net);
    let mut scratch = Scratch::default();
    let mut trace = Vec::with_capacity(updates);
    for _ in 0..updates {
        let batch = sample_training_batch(replay, case_base, cfg, rng)?;
        trace.push(net.fit_batch_with(&batch, optimizer, &mut grads, &mut scratch)?);
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_net_is_one_half_everywhere() {
        let e = EqualityNet::zeros(3, &[8]).unwrap();
        assert_eq!(e.similarity(&[1.0, 2.0, 3.0], &[-4.0, 0.0, 9.0]).unwrap(), 0.5);
    }

    #[test]
    fn similarity_in_unit_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let e = EqualityNet::new(2, &[16, 16], &mut rng).unwrap();
        for _ in 0..1000 {
            let a = [rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0)];
            let b = [rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0)];
            let d = e.similarity(&a, &b).unwrap();
            assert!((0.0..=1.0).contains(&d));
        }
    }

    #[test]
    fn dimension_mismatch() {
        let e = EqualityNet::zeros(2, &[4]).unwrap();
        assert_eq!(
            e.similarity(&[1.0], &[1.0, 2.0]),
            Err(NetError::DimensionMismatch {
                expected: 2,
                actual: 1
            })
        );
    }

    #[test]
    fn zero_updates_leave_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut e = EqualityNet::new(1, &[4], &mut rng).unwrap();
        let before = e.clone();
        let mut replay = ReplayBuffer::new(4);
        replay.add_trajectory(vec![vec![0.0], vec![1.0]]).unwrap();
        replay.add_trajectory(vec![vec![2.0], vec![3.0]]).unwrap();
        let mut opt = Optimizer::adam(1e-3);
        let cfg = EqualityNetConfig {
            nu: 0,
            ..EqualityNetConfig::default()
        };
        let trace = train_equality_net(&mut e, &mut opt, &replay, &CaseBase::default(), &cfg, 0, &mut rng).unwrap();
        assert!(trace.is_empty());
        assert_eq!(e, before);
    }

    #[test]
    fn config_validation() {
        assert!(EqualityNetConfig::default().validate().is_ok());
        let odd = EqualityNetConfig {
            batch_size: 32,
            nu: 7,
            ..EqualityNetConfig::default()
        };
        assert!(odd.validate().is_err());
        let too_many = EqualityNetConfig {
            batch_size: 4,
            nu: 6,
            ..EqualityNetConfig::default()
        };
        assert!(too_many.validate().is_err());
        let no_window = EqualityNetConfig {
            window_frame: 0,
            ..EqualityNetConfig::default()
        };
        assert!(no_window.validate().is_err());
    }
}
