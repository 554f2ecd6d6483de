//! Train/validation splitters and resamplers for time series.
//!
//! Classical schemes return a [`SplitPlan`] over positions `0..T` of a
//! supervised dataset. The cGAN scheme returns synthetic paths instead.

mod bootstrap;
mod splits;

pub use bootstrap::{stationary_bootstrap, BootstrapSample};
pub use splits::{
    split_block, split_hv_block, split_kfold, split_naive, split_one_split, split_sliding, split_stationary_bootstrap,
};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cgan::{CganModel, SampleMode};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub scheme: String,
    pub params: BTreeMap<String, f64>,
    /// Number of positions the plan was built for.
    pub len: usize,
    pub folds: Vec<Fold>,
}

impl SplitPlan {
    pub(crate) fn new(scheme: &str, params: &[(&str, f64)], len: usize, folds: Vec<Fold>) -> Self {
        Self {
            scheme: scheme.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            len,
            folds,
        }
    }

    pub fn fold_count(&self) -> usize {
        self.folds.len()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// A synthetic path split chronologically into training and validation.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSplit {
    pub path: Vec<f64>,
    /// `path[..split]` trains, `path[split..]` validates.
    pub split: usize,
}

impl SyntheticSplit {
    pub fn train(&self) -> &[f64] {
        &self.path[..self.split]
    }

    pub fn val(&self) -> &[f64] {
        &self.path[self.split..]
    }
}

/// Validation horizon used inside synthetic paths: `h` capped at half the
/// path length.
pub fn synthetic_horizon(path_len: usize, h: usize) -> usize {
    h.min(path_len / 2)
}

/// Draw `b` recursive paths from `model`, seeded by the real in-sample
/// series, and one-split each at `len - h` (with `h` capped at half the
/// path length).
pub fn cgan_splits(model: &CganModel, in_sample: &[f64], b: usize, h: usize, seed: u64) -> Result<Vec<SyntheticSplit>> {
    if model.train_len > in_sample.len() {
        return Err(Error::Leakage(format!(
            "model saw {} points, in-sample has {}",
            model.train_len,
            in_sample.len()
        )));
    }
    if b == 0 || h == 0 {
        return Err(Error::param("cgan splits need b >= 1 and h >= 1"));
    }
    let paths = model.sample_paths(in_sample, SampleMode::Recursive, b, seed)?;
    Ok(paths
        .into_iter()
        .map(|path| {
            let split = path.len() - synthetic_horizon(path.len(), h);
            SyntheticSplit { path, split }
        })
        .collect())
}
