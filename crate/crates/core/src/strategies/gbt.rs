use ndarray::{ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use super::tree::{Presorted, RegressionTree};
use crate::timeseries::mean_std;

/// Least-squares gradient boosting: start at the target mean, then each
/// depth-limited tree fits the current residuals and is added with
/// shrinkage `learning_rate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtModel {
    pub init: f64,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub trees: Vec<RegressionTree>,
}

impl GbtModel {
    pub fn fit(x: ArrayView2<f64>, y: &[f64], n_trees: usize, learning_rate: f64, max_depth: usize) -> Self {
        let pre = Presorted::new(x);
        let (init, _) = mean_std(y);
        let mut fitted = vec![init; y.len()];
        let mut residual = vec![0.0; y.len()];
        let mut trees = Vec::with_capacity(n_trees);
        for _ in 0..n_trees {
            for ((r, &t), &f) in residual.iter_mut().zip(y).zip(&fitted) {
                *r = t - f;
            }
            let tree = RegressionTree::fit_presorted(&pre, &residual, 2, Some(max_depth));
            for (i, f) in fitted.iter_mut().enumerate() {
                *f += learning_rate * tree.predict_row(x.row(i));
            }
            trees.push(tree);
        }
        Self {
            init,
            learning_rate,
            max_depth,
            trees,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.trees.first().map_or(0, |t| t.input_dim())
    }

    /// The model after its first `n` rounds; identical to fitting `n` trees.
    pub fn truncated(&self, n: usize) -> Self {
        Self {
            trees: self.trees[..n.min(self.trees.len())].to_vec(),
            ..self.clone()
        }
    }

    pub fn predict_row(&self, x: ArrayView1<f64>) -> f64 {
        let mut out = self.init;
        for t in &self.trees {
            out += self.learning_rate * t.predict_row(x);
        }
        out
    }
}
