use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Positions into a source series of length `T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSample {
    pub indices: Vec<usize>,
    pub expected_block: f64,
}

impl BootstrapSample {
    pub fn apply<T: Copy>(&self, source: &[T]) -> Vec<T> {
        self.indices.iter().map(|&i| source[i]).collect()
    }
}

/// Stationary bootstrap: blocks start uniformly, continue to
/// the next position (wrapping circularly) with probability
/// `1 - 1/expected_block`, and restart otherwise.
pub fn stationary_bootstrap(len: usize, expected_block: f64, seed: u64) -> Result<BootstrapSample> {
    if len < 2 {
        return Err(Error::InsufficientHistory { needed: 1, got: len });
    }
    if !(expected_block >= 1.0) || !expected_block.is_finite() {
        return Err(Error::param(format!("expected block {expected_block} must be >= 1")));
    }
    let restart = 1.0 / expected_block;
    let mut rng = rng_from_seed(seed);
    let mut indices = Vec::with_capacity(len);
    let mut current = rng.random_range(0..len);
    indices.push(current);
    while indices.len() < len {
        current = if rng.random::<f64>() < restart {
            rng.random_range(0..len)
        } else {
            (current + 1) % len
        };
        indices.push(current);
    }
    Ok(BootstrapSample {
        indices,
        expected_block,
    })
}
