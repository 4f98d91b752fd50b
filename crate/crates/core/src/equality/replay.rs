use alloc::collections::VecDeque;

use super::EqualityError;
use crate::Trajectory;

/// Bounded FIFO of the agent's own trajectories.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayBuffer {
    trajectories: VecDeque<Trajectory>,
    capacity: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        Self {
            trajectories: VecDeque::with_capacity(capacity.min(1024)),
            capacity: capacity.max(1),
        }
    }

    /// Stores `trajectory`, evicting the oldest one when full. No dedup.
    pub fn add_trajectory(&mut self, trajectory: Trajectory) -> Result<(), EqualityError> {
        if trajectory.len() < 2 {
            return Err(EqualityError::TrajectoryTooShort {
                len: trajectory.len(),
            });
        }
        if self.trajectories.len() == self.capacity {
            self.trajectories.pop_front();
        }
        self.trajectories.push_back(trajectory);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn get(&self, index: usize) -> Option<&Trajectory> {
        self.trajectories.get(index)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Trajectory> {
        self.trajectories.iter()
    }
}
