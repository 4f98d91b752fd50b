//! Case-based inverse reinforcement learning.
//!
//! An agent learns to reach the states an expert reached, from a handful of
//! expert states and no expert actions. A pair classifier (the equality net)
//! is trained on the agent's own trajectories to tell whether one state can
//! follow another within a few steps; the reward for a state is the position,
//! along the expert trajectory, of the most similar stored expert state.
//!
//! The crate is `no_std` + `alloc`. File formats, configuration and the
//! experiment harness live in the `cbirl` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod agent;
pub mod case_base;
pub mod env;
pub mod equality;
pub mod numcore;
pub mod protocol;

/// Real-valued state feature vector.
pub type State = alloc::vec::Vec<f64>;

/// Ordered sequence of states.
pub type Trajectory = alloc::vec::Vec<State>;
