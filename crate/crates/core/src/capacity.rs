//! Hopfield-style storage capacity bound for a network of `n` neurons.

use crate::error::{Error, Result};

/// Result of a capacity query: how many patterns `neurons` can store.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CapacityEstimate {
    pub neurons: u64,
    pub patterns: u64,
}

/// Largest whole number of patterns retrievable from `n` neurons,
/// `floor(n / (4 ln n))`.
///
/// Undefined for `n <= 1` where `ln n <= 0`.
pub fn capacity_bound(n: u64) -> Result<CapacityEstimate> {
    if n <= 1 {
        return Err(Error::argument(format!(
            "capacity bound needs n > 1 neurons, got {n}"
        )));
    }
    let nf = n as f64;
    let patterns = (nf / (4.0 * nf.ln())).floor() as u64;
    Ok(CapacityEstimate {
        neurons: n,
        patterns,
    })
}
