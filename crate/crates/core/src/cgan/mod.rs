//! Conditional GAN over a univariate return series.
//!
//! The generator maps `[noise (noise_dim) | lags (p)]` to the next scaled
//! return; the discriminator maps `[candidate (1) | lags (p)]` to the
//! probability that the candidate is real. Training alternates one
//! discriminator step and one non-saturating generator step per minibatch
//! and snapshots both networks every `snap` epochs. Each snapshot is scored
//! by the mean RMSE of `eval_samples` teacher-forced paths against the
//! training series, and the best snapshot is kept.

mod persist;
mod sample;
mod train;

pub use sample::{path_rmse, SampleMode};
pub use train::train_and_select;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::MlpNet;
use crate::timeseries::ScalerParams;

/// Hidden-layer width class shared by generator and discriminator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeClass {
    Small,
    Medium,
    Large,
}

impl SizeClass {
    pub const ALL: [SizeClass; 3] = [SizeClass::Small, SizeClass::Medium, SizeClass::Large];

    pub fn hidden_units(self) -> usize {
        match self {
            SizeClass::Small => 5,
            SizeClass::Medium => 100,
            SizeClass::Large => 500,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SizeClass::Small => "small",
            SizeClass::Medium => "medium",
            SizeClass::Large => "large",
        }
    }
}

impl std::str::FromStr for SizeClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "small" => Ok(SizeClass::Small),
            "medium" => Ok(SizeClass::Medium),
            "large" => Ok(SizeClass::Large),
            other => Err(Error::param(format!("unknown size class {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CganConfig {
    /// Number of conditioning lags.
    pub p: usize,
    pub noise_dim: usize,
    pub gen_hidden: usize,
    pub disc_hidden: usize,
    /// One epoch is one discriminator step plus one generator step.
    pub epochs: usize,
    /// Minibatch size `L`.
    pub batch_size: usize,
    pub snap: usize,
    /// Teacher-forced paths drawn per snapshot (`C`).
    pub eval_samples: usize,
    pub learning_rate: f64,
}

impl Default for CganConfig {
    fn default() -> Self {
        Self::sized(SizeClass::Medium)
    }
}

impl CganConfig {
    pub fn sized(size: SizeClass) -> Self {
        Self {
            p: 252,
            noise_dim: 252,
            gen_hidden: size.hidden_units(),
            disc_hidden: size.hidden_units(),
            epochs: 20_000,
            batch_size: 252,
            snap: 200,
            eval_samples: 50,
            learning_rate: 0.01,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("p", self.p),
            ("noise_dim", self.noise_dim),
            ("gen_hidden", self.gen_hidden),
            ("disc_hidden", self.disc_hidden),
            ("epochs", self.epochs),
            ("batch_size", self.batch_size),
            ("snap", self.snap),
            ("eval_samples", self.eval_samples),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(Error::param(format!("cgan {name} must be positive")));
        }
        if self.snap > self.epochs {
            return Err(Error::param(format!(
                "snap {} exceeds epochs {}: no snapshot would be taken",
                self.snap, self.epochs
            )));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::param("cgan learning rate must be positive"));
        }
        Ok(())
    }

    /// Number of snapshots taken during training.
    pub fn snapshot_count(&self) -> usize {
        self.epochs / self.snap
    }
}

/// Frozen generator/discriminator pair with the scalers fit at training time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSnapshot {
    pub generator: MlpNet,
    pub discriminator: MlpNet,
    pub epoch: usize,
    pub rmse: f64,
    pub feature_scaler: ScalerParams,
    pub target_scaler: ScalerParams,
}

/// One point of the training curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRecord {
    pub epoch: usize,
    pub rmse: f64,
    /// Mean discriminator output on the real half of the last minibatch.
    pub d_real: Option<f64>,
    /// Mean discriminator output on the generated half of the last minibatch.
    pub d_fake: Option<f64>,
}

/// A trained and selected cGAN.
#[derive(Debug, Clone, PartialEq)]
pub struct CganModel {
    pub selected: GeneratorSnapshot,
    pub curve: Vec<SnapshotRecord>,
    pub config: CganConfig,
    pub seed: u64,
    /// Length of the series the model was trained on.
    pub train_len: usize,
}

impl CganModel {
    /// Wrap a hand-built snapshot, e.g. for testing sampling in isolation.
    pub fn from_snapshot(selected: GeneratorSnapshot, config: CganConfig, seed: u64) -> Result<Self> {
        let gen_in = config.noise_dim + config.p;
        if selected.generator.input_dim() != gen_in || selected.generator.output_dim() != 1 {
            return Err(Error::shape(format!(
                "generator dims {:?} for noise {} + lags {}",
                selected.generator.layer_dims(),
                config.noise_dim,
                config.p
            )));
        }
        Ok(Self {
            curve: vec![SnapshotRecord {
                epoch: selected.epoch,
                rmse: selected.rmse,
                d_real: None,
                d_fake: None,
            }],
            selected,
            config,
            seed,
            train_len: 0,
        })
    }

    /// `(epoch, rmse)` pairs in training order.
    pub fn rmse_curve(&self) -> Vec<(usize, f64)> {
        self.curve.iter().map(|r| (r.epoch, r.rmse)).collect()
    }

    pub fn p(&self) -> usize {
        self.config.p
    }
}
