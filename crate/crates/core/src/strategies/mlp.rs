use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::nn::{train_regression, HiddenActivation, MlpNet, OutputActivation, SgdConfig};
use crate::rng::{derive_seed, stream};
use crate::timeseries::ScalerParams;

/// One tanh hidden layer and a linear output, trained on z-scored features
/// and target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub net: MlpNet,
    pub feature_scalers: Vec<ScalerParams>,
    pub target_scaler: ScalerParams,
}

impl MlpModel {
    #[allow(clippy::too_many_arguments)]
    pub fn fit(
        x: ArrayView2<f64>,
        y: &[f64],
        hidden: usize,
        weight_decay: f64,
        epochs: usize,
        learning_rate: f64,
        batch_size: usize,
        seed: u64,
    ) -> Result<Self> {
        let feature_scalers: Vec<ScalerParams> = x
            .columns()
            .into_iter()
            .map(|c| ScalerParams::fit_or_center(&c.to_vec()))
            .collect();
        let target_scaler = ScalerParams::fit_or_center(y);
        let z = scale(x, &feature_scalers);
        let t = Array2::from_shape_fn((y.len(), 1), |(i, _)| target_scaler.apply(y[i]));
        let mut net = MlpNet::new(
            &[x.ncols(), hidden, 1],
            HiddenActivation::Tanh,
            OutputActivation::Linear,
            weight_decay,
            &mut stream(seed, "mlp-init", 0),
        )?;
        let config = SgdConfig {
            learning_rate,
            batch_size,
            epochs,
            seed: derive_seed(seed, "mlp-train", 0),
        };
        train_regression(&mut net, z.view(), t.view(), &config)?;
        Ok(Self {
            net,
            feature_scalers,
            target_scaler,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.net.input_dim()
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Vec<f64>> {
        let out = self.net.predict(scale(x, &self.feature_scalers).view())?;
        Ok(out.iter().map(|&z| self.target_scaler.invert(z)).collect())
    }
}

fn scale(x: ArrayView2<f64>, scalers: &[ScalerParams]) -> Array2<f64> {
    let mut z = x.to_owned();
    for (mut col, s) in z.columns_mut().into_iter().zip(scalers) {
        col.mapv_inplace(|v| s.apply(v));
    }
    z
}
