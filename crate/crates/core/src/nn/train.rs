use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::MlpNet;
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SgdConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl SgdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0) || self.batch_size == 0 || self.epochs == 0 {
            return Err(Error::param(format!("sgd config {self:?}")));
        }
        Ok(())
    }
}

/// Minimise `0.5 * mean((net(x) - y)^2)` by minibatch SGD. Each epoch is a
/// full pass in a fresh seeded order; the last partial batch is kept.
pub fn train_regression(net: &mut MlpNet, x: ArrayView2<f64>, y: ArrayView2<f64>, config: &SgdConfig) -> Result<()> {
    config.validate()?;
    if x.nrows() != y.nrows() || y.ncols() != net.output_dim() {
        return Err(Error::shape(format!("x {:?} vs y {:?}", x.dim(), y.dim())));
    }
    if x.nrows() == 0 {
        return Err(Error::param("empty training set"));
    }
    let mut rng = rng_from_seed(config.seed);
    let mut order: Vec<usize> = (0..x.nrows()).collect();
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            let xb = x.select(Axis(0), batch);
            let yb = y.select(Axis(0), batch);
            let pass = net.forward(xb.view())?;
            let upstream: Array2<f64> = (&pass.output - &yb) / batch.len() as f64;
            let grads = net.param_gradients(&pass, upstream.view())?;
            net.sgd_step(&grads, config.learning_rate, epoch)?;
        }
    }
    Ok(())
}
