//! Dense linear algebra and a small feed-forward network with analytic
//! backpropagation. Everything is `f64`.

mod matrix;
mod net;
mod optim;

pub use matrix::Matrix;
pub use net::{binary_cross_entropy, logistic, Activation, FeedForwardNet, ForwardCache, Gradients};
pub use optim::{Optimizer, OptimizerKind};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NetError {
    #[error("dimension mismatch: expected length {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("invalid layer layout")]
    InvalidLayout,
    #[error("backward called without a cached forward pass for this network")]
    MissingForwardPass,
    #[error("non-finite value{}", match .layer { Some(l) => alloc::format!(" in layer {l}"), None => alloc::string::String::new() })]
    NonFinite { layer: Option<usize> },
}
