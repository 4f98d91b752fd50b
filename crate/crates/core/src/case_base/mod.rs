//! Expert case base and the retrieval-based reward.
//!
//! The case base stores subsampled, state-only expert trajectories. The reward
//! for an agent state is the 1-based position (within its own trajectory) of
//! the stored expert state the equality net finds most similar, provided that
//! similarity strictly exceeds `tau`; otherwise it is the penalty `mu`.

use alloc::vec::Vec;

use crate::numcore::NetError;
use crate::{State, Trajectory};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CaseBaseError {
    #[error("subsampling step must be at least 1")]
    InvalidStep,
    #[error("trajectory {index} is empty")]
    EmptyTrajectory { index: usize },
    #[error("state dimension {actual} in trajectory {trajectory} differs from {expected}")]
    InconsistentDimension {
        trajectory: usize,
        expected: usize,
        actual: usize,
    },
    #[error("invalid reward configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("similarity model failed: {0}")]
    Similarity(#[from] NetError),
}

/// Anything that scores how reachable `b` is from `a`, in `[0, 1]`.
pub trait SimilarityModel {
    fn similarity(&self, a: &[f64], b: &[f64]) -> Result<f64, NetError>;
}

impl<F> SimilarityModel for F
where
    F: Fn(&[f64], &[f64]) -> f64,
{
    fn similarity(&self, a: &[f64], b: &[f64]) -> Result<f64, NetError> {
        Ok(self(a, b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct RewardConfig {
    /// Similarity threshold, `0 < tau < 1`.
    pub tau: f64,
    /// Penalty when nothing is similar enough, `mu <= 0`.
    pub mu: f64,
    /// Shaping coefficient, `0 <= alpha <= 1`.
    pub alpha: f64,
    /// Recompute the reward only every k-th step, reusing the last value in
    /// between.
    pub reward_every_k: usize,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            tau: 0.9,
            mu: -1.0,
            alpha: 1.0,
            reward_every_k: 1,
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<(), CaseBaseError> {
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(CaseBaseError::InvalidConfig("tau must lie in (0, 1)"));
        }
        if !(self.mu <= 0.0) {
            return Err(CaseBaseError::InvalidConfig("mu must be <= 0"));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(CaseBaseError::InvalidConfig("alpha must lie in [0, 1]"));
        }
        if self.reward_every_k == 0 {
            return Err(CaseBaseError::InvalidConfig("reward_every_k must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CaseBase {
    trajectories: Vec<Trajectory>,
    state_dim: usize,
}

impl CaseBase {
    pub fn new(trajectories: Vec<Trajectory>) -> Result<Self, CaseBaseError> {
        let state_dim = trajectories
            .iter()
            .flat_map(|t| t.first())
            .map(Vec::len)
            .next()
            .unwrap_or(0);
        for (index, t) in trajectories.iter().enumerate() {
            if t.is_empty() {
                return Err(CaseBaseError::EmptyTrajectory { index });
            }
            if let Some(bad) = t.iter().find(|s| s.len() != state_dim) {
                return Err(CaseBaseError::InconsistentDimension {
                    trajectory: index,
                    expected: state_dim,
                    actual: bad.len(),
                });
            }
        }
        Ok(Self {
            trajectories,
            state_dim,
        })
    }

    pub fn trajectories(&self) -> &[Trajectory] {
        &self.trajectories
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    pub fn state_count(&self) -> usize {
        self.trajectories.iter().map(Vec::len).sum()
    }

    pub fn max_position(&self) -> usize {
        self.trajectories.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Every stored state in scan order as `(trajectory, position, state)`,
    /// with 1-based positions restarting in each trajectory.
    pub fn cases(&self) -> impl Iterator<Item = (usize, usize, &State)> {
        self.trajectories
            .iter()
            .enumerate()
            .flat_map(|(t, traj)| traj.iter().enumerate().map(move |(i, s)| (t, i + 1, s)))
    }
}

/// Keeps the states at indices `0, k, 2k, ...`.
pub fn subsample(trajectory: &[State], k: usize) -> Result<Trajectory, CaseBaseError> {
    if k == 0 {
        return Err(CaseBaseError::InvalidStep);
    }
    if trajectory.is_empty() {
        return Err(CaseBaseError::EmptyTrajectory { index: 0 });
    }
    Ok(trajectory.iter().step_by(k).cloned().collect())
}

/// Retrieval reward for `state`: position of the most similar expert state
/// whose similarity strictly beats the running threshold (initially `tau`),
/// or `mu` when none does. Ties keep the earlier case.
pub fn reward<M: SimilarityModel + ?Sized>(
    model: &M,
    case_base: &CaseBase,
    state: &[f64],
    cfg: &RewardConfig,
) -> Result<f64, CaseBaseError> {
    if case_base.is_empty() {
        log::warn!("reward requested from an empty case base; returning mu");
        return Ok(cfg.mu);
    }
    let mut most_similar = cfg.mu;
    let mut threshold = cfg.tau;
    for (_, position, expert) in case_base.cases() {
        let d = model.similarity(state, expert)?;
        if d > threshold {
            most_similar = position as f64;
            threshold = d;
        }
    }
    Ok(most_similar)
}

/// `r_post - alpha * r_pre`.
pub fn shaped_reward(r_post: f64, r_pre: f64, cfg: &RewardConfig) -> f64 {
    r_post - cfg.alpha * r_pre
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn line(n: usize) -> Trajectory {
        (0..n).map(|i| vec![i as f64]).collect()
    }

    #[test]
    fn subsample_examples() {
        let t = line(11);
        let s = subsample(&t, 5).unwrap();
        assert_eq!(s, vec![vec![0.0], vec![5.0], vec![10.0]]);
        assert_eq!(subsample(&t, 1).unwrap(), t);
        assert_eq!(subsample(&line(150), 10).unwrap().len(), 15);
        assert_eq!(subsample(&t, 0), Err(CaseBaseError::InvalidStep));
    }

    #[test]
    fn nothing_similar_gives_mu() {
        let cb = CaseBase::new(vec![line(5)]).unwrap();
        let cfg = RewardConfig {
            mu: -3.0,
            ..RewardConfig::default()
        };
        let far = |_: &[f64], _: &[f64]| 0.2;
        assert_eq!(reward(&far, &cb, &[0.0], &cfg).unwrap(), -3.0);
    }

    #[test]
    fn most_similar_third_state_gives_three() {
        let cb = CaseBase::new(vec![line(5)]).unwrap();
        let cfg = RewardConfig::default();
        let near_two = |_: &[f64], b: &[f64]| if b[0] == 2.0 { 0.97 } else { 0.91 };
        assert_eq!(reward(&near_two, &cb, &[7.0], &cfg).unwrap(), 3.0);
    }

    #[test]
    fn ties_keep_first_in_scan_order() {
        let cb = CaseBase::new(vec![line(3), line(4)]).unwrap();
        let cfg = RewardConfig::default();
        let flat = |_: &[f64], _: &[f64]| 0.95;
        assert_eq!(reward(&flat, &cb, &[0.0], &cfg).unwrap(), 1.0);
        // Equal maxima in two trajectories: the first trajectory wins.
        let peaks = |_: &[f64], b: &[f64]| if b[0] == 2.0 { 0.99 } else { 0.5 };
        assert_eq!(reward(&peaks, &cb, &[0.0], &cfg).unwrap(), 3.0);
    }

    #[test]
    fn positions_restart_per_trajectory() {
        let cb = CaseBase::new(vec![line(6), vec![vec![42.0], vec![43.0]]]).unwrap();
        let cfg = RewardConfig::default();
        let pick = |_: &[f64], b: &[f64]| if b[0] == 43.0 { 0.99 } else { 0.95 };
        assert_eq!(reward(&pick, &cb, &[0.0], &cfg).unwrap(), 2.0);
    }

    #[test]
    fn empty_case_base_returns_mu() {
        let cb = CaseBase::default();
        let cfg = RewardConfig::default();
        let any = |_: &[f64], _: &[f64]| 1.0;
        assert_eq!(reward(&any, &cb, &[0.0], &cfg).unwrap(), cfg.mu);
    }

    #[test]
    fn shaping_examples() {
        let with = |alpha| RewardConfig {
            alpha,
            ..RewardConfig::default()
        };
        assert_eq!(shaped_reward(5.0, 7.0, &with(0.0)), 5.0);
        assert_eq!(shaped_reward(5.0, 3.0, &with(1.0)), 2.0);
        assert_eq!(shaped_reward(2.0, -4.0, &with(0.5)), 4.0);
    }

    #[test]
    fn case_base_validation() {
        assert_eq!(
            CaseBase::new(vec![line(2), vec![]]),
            Err(CaseBaseError::EmptyTrajectory { index: 1 })
        );
        assert!(matches!(
            CaseBase::new(vec![line(2), vec![vec![1.0, 2.0]]]),
            Err(CaseBaseError::InconsistentDimension { trajectory: 1, .. })
        ));
        let cb = CaseBase::new(vec![line(15)]).unwrap();
        let positions: Vec<usize> = cb.cases().map(|(_, p, _)| p).collect();
        assert_eq!(positions, (1..=15).collect::<Vec<_>>());
    }

    #[test]
    fn config_validation() {
        assert!(RewardConfig::default().validate().is_ok());
        for bad in [
            RewardConfig { tau: 1.0, ..RewardConfig::default() },
            RewardConfig { tau: 0.0, ..RewardConfig::default() },
            RewardConfig { mu: 0.5, ..RewardConfig::default() },
            RewardConfig { alpha: 1.5, ..RewardConfig::default() },
            RewardConfig { reward_every_k: 0, ..RewardConfig::default() },
        ] {
            assert!(bad.validate().is_err());
        }
    }
}
