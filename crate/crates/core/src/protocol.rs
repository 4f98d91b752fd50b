//! Evaluation arithmetic: return scaling and quantiles.

use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProtocolError {
    #[error("degenerate scaling: random and expert returns are both {0}")]
    DegenerateScaling(f64),
    #[error("quantiles of an empty sample")]
    Empty,
    #[error("quantile level {0} outside [0, 1]")]
    InvalidLevel(f64),
    #[error("sample contains a non-finite value")]
    NonFinite,
}

/// Maps each return affinely so `random` becomes 0 and `expert` becomes 1.
pub fn scale_returns(returns: &[f64], random: f64, expert: f64) -> Result<Vec<f64>, ProtocolError> {
    if expert == random {
        return Err(ProtocolError::DegenerateScaling(random));
    }
    let span = expert - random;
    Ok(returns.iter().map(|r| (r - random) / span).collect())
}

/// Linear-interpolation quantile at each level in `levels`: position
/// `q * (n - 1)` on the sorted sample.
pub fn quantiles(values: &[f64], levels: &[f64]) -> Result<Vec<f64>, ProtocolError> {
    if values.is_empty() {
        return Err(ProtocolError::Empty);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(ProtocolError::NonFinite);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let last = (sorted.len() - 1) as f64;
    levels
        .iter()
        .map(|&q| {
            if !(0.0..=1.0).contains(&q) {
                return Err(ProtocolError::InvalidLevel(q));
            }
            let pos = q * last;
            let lo = libm::floor(pos) as usize;
            let hi = libm::ceil(pos) as usize;
            let frac = pos - lo as f64;
            Ok(sorted[lo] + (sorted[hi] - sorted[lo]) * frac)
        })
        .collect()
}

/// The (0.25, 0.5, 0.75) quartiles.
pub fn quartiles(values: &[f64]) -> Result<[f64; 3], ProtocolError> {
    let q = quantiles(values, &[0.25, 0.5, 0.75])?;
    Ok([q[0], q[1], q[2]])
}
