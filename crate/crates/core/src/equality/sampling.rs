use alloc::vec::Vec;

use rand::Rng;

use super::{EqualityError, EqualityNetConfig, ReplayBuffer};
use crate::case_base::CaseBase;
use crate::State;

/// Where the two states of a training pair came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairSource {
    /// Same replay trajectory, `first <= second <= first + window_frame`.
    Within {
        trajectory: usize,
        first: usize,
        second: usize,
    },
    /// Two distinct replay trajectories.
    Across {
        first_trajectory: usize,
        first: usize,
        second_trajectory: usize,
        second: usize,
    },
    /// Replay state paired with a case-base state (1-based position).
    Divergence {
        trajectory: usize,
        index: usize,
        case_trajectory: usize,
        case_position: usize,
    },
    /// Adjacent stored expert states (only with `train_on_expert`).
    Expert {
        case_trajectory: usize,
        first_position: usize,
        second_position: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPair {
    pub first: State,
    pub second: State,
    /// 1.0 for "reachable within the window", 0.0 otherwise.
    pub label: f64,
    pub source: PairSource,
}

/// Draws one training batch for the equality net:
/// `(batch_size - nu) / 2` within-window positives, as many cross-trajectory
/// negatives, and `nu` replay/case-base divergence negatives.
pub fn sample_training_batch<R: Rng + ?Sized>(
    replay: &ReplayBuffer,
    case_base: &CaseBase,
    cfg: &EqualityNetConfig,
    rng: &mut R,
) -> Result<Vec<LabeledPair>, EqualityError> {
    cfg.validate()?;
    if replay.len() < 2 {
        return Err(EqualityError::InsufficientReplayDiversity {
            trajectories: replay.len(),
        });
    }
    if cfg.nu > 0 && case_base.is_empty() {
        return Err(EqualityError::EmptyCaseBase);
    }
    let half = (cfg.batch_size - cfg.nu) / 2;
    let extra = if cfg.train_on_expert && !case_base.is_empty() {
        half / 2
    } else {
        0
    };
    let mut batch = Vec::with_capacity(cfg.batch_size + extra);

    for _ in 0..half {
        let t = rng.gen_range(0..replay.len());
        let traj = replay.get(t).expect("index in range");
        let max_gap = cfg.window_frame.min(traj.len() - 1);
        let gap = rng.gen_range(0..=max_gap);
        let first = rng.gen_range(0..traj.len() - gap);
        let second = first + gap;
        batch.push(LabeledPair {
            first: traj[first].clone(),
            second: traj[second].clone(),
            label: 1.0,
            source: PairSource::Within {
                trajectory: t,
                first,
                second,
            },
        });
    }

    for _ in 0..half {
        let a = rng.gen_range(0..replay.len());
        let mut b = rng.gen_range(0..replay.len() - 1);
        if b >= a {
            b += 1;
        }
        let (ta, tb) = (replay.get(a).unwrap(), replay.get(b).unwrap());
        let ia = rng.gen_range(0..ta.len());
        let ib = rng.gen_range(0..tb.len());
        batch.push(LabeledPair {
            first: ta[ia].clone(),
            second: tb[ib].clone(),
            label: 0.0,
            source: PairSource::Across {
                first_trajectory: a,
                first: ia,
                second_trajectory: b,
                second: ib,
            },
        });
    }

    let case_trajs = case_base.trajectories();
    for _ in 0..cfg.nu {
        let t = rng.gen_range(0..replay.len());
        let traj = replay.get(t).unwrap();
        let index = rng.gen_range(0..traj.len());
        let c = rng.gen_range(0..case_trajs.len());
        let pos = rng.gen_range(0..case_trajs[c].len());
        batch.push(LabeledPair {
            first: traj[index].clone(),
            second: case_trajs[c][pos].clone(),
            label: 0.0,
            source: PairSource::Divergence {
                trajectory: t,
                index,
                case_trajectory: c,
                case_position: pos + 1,
            },
        });
    }

    for _ in 0..extra {
        let c = rng.gen_range(0..case_trajs.len());
        let traj = &case_trajs[c];
        let gap = usize::from(traj.len() > 1 && rng.gen_bool(0.5));
        let first = rng.gen_range(0..traj.len() - gap);
        batch.push(LabeledPair {
            first: traj[first].clone(),
            second: traj[first + gap].clone(),
            label: 1.0,
            source: PairSource::Expert {
                case_trajectory: c,
                first_position: first + 1,
                second_position: first + gap + 1,
            },
        });
    }

    Ok(batch)
}
