//! Experiment orchestration: expert training, trajectory recording, the
//! case-based learning loop, evaluation and result files.

mod expert;
mod output;
mod run;
mod sweep;

use cbirl_core::agent::{AgentError, QAgent};
use cbirl_core::case_base::CaseBaseError;
use cbirl_core::env::{true_return, EnvError, Environment};
use cbirl_core::equality::EqualityError;
use cbirl_core::numcore::NetError;
use cbirl_core::protocol::ProtocolError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use expert::{measure_baselines, record_expert, record_trajectory, train_expert, train_on_true_reward};
pub use output::{write_results, write_returns};
pub use run::{run_cbirl, run_experiment, CbirlRun, EvalPoint, EvalReport, ExperimentResult, Prepared, SeedOutcome};
pub use sweep::{run_sweep, write_sweep, SweepOutcome};

use crate::config::ConfigError;
use crate::formats::FormatError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("environment: {0}")]
    Env(#[from] EnvError),
    #[error("agent: {0}")]
    Agent(#[from] AgentError),
    #[error("equality net: {0}")]
    Equality(#[from] EqualityError),
    #[error("case base: {0}")]
    CaseBase(#[from] CaseBaseError),
    #[error("network: {0}")]
    Net(#[from] NetError),
    #[error("{0}")]
    Protocol(#[from] ProtocolError),
    #[error("expert training failed: mean greedy return {mean} is below the threshold {threshold}")]
    ExpertTrainingFailed { mean: f64, threshold: f64 },
    #[error("expert missed the target on seeds {first}..{last}")]
    ExpertMissedTarget { first: u64, last: u64 },
    #[error("seed {seed}, step {step}: {source}")]
    AtStep {
        seed: u64,
        step: usize,
        #[source]
        source: Box<HarnessError>,
    },
    #[error("{path}: {source}")]
    Csv {
        path: std::path::PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl HarnessError {
    /// Configuration and validation problems (as opposed to failures while
    /// running).
    pub fn is_config_error(&self) -> bool {
        match self {
            HarnessError::Config(_) => true,
            HarnessError::Format(FormatError::Io { .. }) => false,
            HarnessError::Format(_) => true,
            HarnessError::AtStep { source, .. } => source.is_config_error(),
            _ => false,
        }
    }
}

/// Something that picks actions.
pub trait Policy {
    fn act(&mut self, state: &[f64]) -> Result<usize, HarnessError>;
}

/// Greedy with respect to a learned Q function.
pub struct Greedy<'a>(pub &'a QAgent);

impl Policy for Greedy<'_> {
    fn act(&mut self, state: &[f64]) -> Result<usize, HarnessError> {
        Ok(self.0.greedy_action(state)?)
    }
}

/// Uniformly random actions.
pub struct UniformRandom {
    rng: ChaCha8Rng,
    actions: usize,
}

impl UniformRandom {
    pub fn new(actions: usize, seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            actions,
        }
    }
}

impl Policy for UniformRandom {
    fn act(&mut self, _: &[f64]) -> Result<usize, HarnessError> {
        Ok(self.rng.gen_range(0..self.actions))
    }
}

/// Hidden-reward return of one full episode per seed.
pub fn evaluate(policy: &mut dyn Policy, env: &mut dyn Environment, seeds: &[u64]) -> Result<Vec<f64>, HarnessError> {
    let spec = env.spec();
    let mut rewards = Vec::with_capacity(spec.horizon);
    seeds
        .iter()
        .map(|&seed| {
            let mut s = env.reset(seed);
            rewards.clear();
            for _ in 0..spec.horizon {
                let r = env.step(policy.act(&s)?)?;
                rewards.push(r.true_reward);
                s = r.next_state;
            }
            Ok(true_return(&rewards, spec.gamma))
        })
        .collect()
}

/// Independent seed streams derived from one base seed.
pub(crate) fn derive_seed(base: u64, stream: u64, index: u64) -> u64 {
    // SplitMix64 finaliser over a combination of the inputs.
    let mut z = base
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(stream.wrapping_mul(0xD1B5_4A32_D192_ED03))
        .wrapping_add(index);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) mod streams {
    pub const TRAIN_EPISODE: u64 = 1;
    pub const EVAL_EPISODE: u64 = 2;
    pub const RANDOM_BASELINE: u64 = 3;
    pub const EXPERT_BASELINE: u64 = 4;
    pub const EXPERT_TRAINING: u64 = 5;
    pub const RUN: u64 = 6;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::World;
    use cbirl_core::env::ChainWorld;

    #[test]
    fn evaluate_returns_one_value_per_seed() {
        let mut env = World::chain(ChainWorld::new(5).unwrap());
        let seeds: Vec<u64> = (0..20).collect();
        let returns = evaluate(&mut UniformRandom::new(2, 0), &mut env, &seeds).unwrap();
        assert_eq!(returns.len(), 20);
    }

    #[test]
    fn deterministic_policy_gives_identical_returns() {
        struct AlwaysRight;
        impl Policy for AlwaysRight {
            fn act(&mut self, _: &[f64]) -> Result<usize, HarnessError> {
                Ok(ChainWorld::RIGHT)
            }
        }
        let mut env = World::chain(ChainWorld::new(5).unwrap());
        let returns = evaluate(&mut AlwaysRight, &mut env, &[1, 2, 3]).unwrap();
        assert_eq!(returns, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn derived_seeds_differ_across_streams() {
        assert_ne!(derive_seed(0, 1, 0), derive_seed(0, 2, 0));
        assert_ne!(derive_seed(0, 1, 0), derive_seed(0, 1, 1));
        assert_eq!(derive_seed(7, 3, 9), derive_seed(7, 3, 9));
    }
}
