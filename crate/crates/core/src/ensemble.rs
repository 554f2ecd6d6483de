//! Bagged ensembles over resampled series, aggregated by the mean.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::backtest::BacktestReport;
use crate::cgan::{CganModel, SampleMode};
use crate::error::{Error, Result};
use crate::resampling::stationary_bootstrap;
use crate::rng::derive_seed;
use crate::strategies::{fit, FittedModel, LearnerSpec};
use crate::timeseries::{build_lagged, mean_std, LaggedDataset};

pub const DEFAULT_BLOCK: f64 = 20.0;

/// Source of the resampled training sets.
#[derive(Debug, Clone, Copy)]
pub enum Resampler<'a> {
    /// Stationary bootstrap of the lagged rows of the real series.
    StatBoot { expected_block: f64 },
    /// Recursive generator paths.
    Cgan { name: &'a str, model: &'a CganModel },
}

impl Resampler<'_> {
    pub fn name(&self) -> String {
        match self {
            Resampler::StatBoot { .. } => "stat_boot".to_string(),
            Resampler::Cgan { name, .. } => name.to_string(),
        }
    }
}

impl fmt::Display for Resampler<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleModel {
    pub resampler: String,
    pub spec: LearnerSpec,
    pub members: Vec<FittedModel>,
}

/// Training set of member `b`. Generator paths are prefixed with the real
/// conditioning window so they yield as many rows as the real series.
pub fn member_dataset(
    resampler: &Resampler,
    in_sample: &[f64],
    p: usize,
    b: usize,
    seed: u64,
) -> Result<LaggedDataset> {
    match *resampler {
        Resampler::StatBoot { expected_block } => {
            let data = build_lagged(in_sample, p)?;
            let sample = stationary_bootstrap(data.len(), expected_block, derive_seed(seed, "member-boot", b as u64))?;
            Ok(data.select(&sample.indices))
        }
        Resampler::Cgan { model, .. } => {
            if model.p() != p {
                return Err(Error::param(format!("generator uses {} lags, learner {p}", model.p())));
            }
            let path = synthetic_series(model, in_sample, b, seed)?;
            build_lagged(&path, p)
        }
    }
}

/// `in_sample[..p]` followed by recursive path `b`. Paths for
/// `b < B` do not depend on `B`.
pub fn synthetic_series(model: &CganModel, in_sample: &[f64], b: usize, seed: u64) -> Result<Vec<f64>> {
    if model.train_len > in_sample.len() {
        return Err(Error::Leakage(format!(
            "generator saw {} points, in-sample has {}",
            model.train_len,
            in_sample.len()
        )));
    }
    let path_seed = derive_seed(seed, "member-path", b as u64);
    let generated = model.sample_path(in_sample, SampleMode::Recursive, path_seed)?;
    let mut series = in_sample[..model.p()].to_vec();
    series.extend(generated);
    Ok(series)
}

/// Fit `b` members in parallel. Member `i` depends only on `(seed, i)`, so a
/// smaller ensemble is a prefix of a larger one.
pub fn build_ensemble(
    resampler: &Resampler,
    spec: &LearnerSpec,
    in_sample: &[f64],
    p: usize,
    b: usize,
    seed: u64,
) -> Result<EnsembleModel> {
    if b == 0 {
        return Err(Error::param("ensemble needs at least one member"));
    }
    spec.validate()?;
    let members = (0..b)
        .into_par_iter()
        .map(|i| {
            let member = || -> Result<FittedModel> {
                let data = member_dataset(resampler, in_sample, p, i, seed)?;
                fit(spec, &data, derive_seed(seed, "member-fit", i as u64))
            };
            member().map_err(|e| Error::Member {
                member: i,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EnsembleModel {
        resampler: resampler.name(),
        spec: spec.clone(),
        members,
    })
}

impl EnsembleModel {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// One row of predictions per member.
    pub fn member_predictions(&self, features: ndarray::ArrayView2<f64>) -> Result<Vec<Vec<f64>>> {
        self.members.iter().map(|m| m.predict(features)).collect()
    }

    pub fn predict(&self, features: ndarray::ArrayView2<f64>) -> Result<Vec<f64>> {
        Ok(mean_prediction(&self.member_predictions(features)?))
    }

    /// Holdout report of the ensemble made of the first `b` members, for
    /// every `b`.
    pub fn incremental_reports(&self, test: &LaggedDataset) -> Result<Vec<BacktestReport>> {
        let preds = self.member_predictions(test.features.view())?;
        let mut sum = vec![0.0; test.len()];
        let mut out = Vec::with_capacity(preds.len());
        for (i, member) in preds.iter().enumerate() {
            for (s, v) in sum.iter_mut().zip(member) {
                *s += v;
            }
            let mean: Vec<f64> = sum.iter().map(|s| s / (i + 1) as f64).collect();
            out.push(BacktestReport::new(&test.targets, &mean)?);
        }
        Ok(out)
    }
}

/// Pointwise mean across members.
pub fn mean_prediction(member_predictions: &[Vec<f64>]) -> Vec<f64> {
    let b = member_predictions.len() as f64;
    let n = member_predictions.first().map_or(0, Vec::len);
    (0..n)
        .map(|t| member_predictions.iter().map(|m| m[t]).sum::<f64>() / b)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceDecomposition {
    pub members: usize,
    /// Mean of the member variances.
    pub avg_variance: f64,
    pub max_variance: f64,
    /// Mean pairwise correlation over distinct member pairs.
    pub avg_correlation: f64,
    /// Variance of the mean prediction.
    pub ensemble_variance: f64,
    /// `avg_variance * (1/B + (B-1)/B * avg_correlation)`.
    pub equal_correlation_approx: f64,
}

/// Variances and covariances are population moments over prediction points.
pub fn variance_decomposition(member_predictions: &[Vec<f64>]) -> Result<VarianceDecomposition> {
    let b = member_predictions.len();
    if b < 2 {
        return Err(Error::param("variance decomposition needs at least two members"));
    }
    let n = member_predictions[0].len();
    if n < 2 || member_predictions.iter().any(|m| m.len() != n) {
        return Err(Error::shape("members need equal lengths of at least two points"));
    }
    let stats: Vec<(f64, f64)> = member_predictions.iter().map(|m| mean_std(m)).collect();
    if stats.iter().any(|&(_, s)| !(s > 0.0)) {
        return Err(Error::DegenerateScale("member predictions have zero variance"));
    }
    let mut corr_sum = 0.0;
    for i in 0..b {
        for j in i + 1..b {
            let cov = covariance(&member_predictions[i], &member_predictions[j]);
            corr_sum += cov / (stats[i].1 * stats[j].1);
        }
    }
    let avg_correlation = corr_sum / (b * (b - 1) / 2) as f64;
    let avg_variance = stats.iter().map(|(_, s)| s * s).sum::<f64>() / b as f64;
    let max_variance = stats.iter().map(|(_, s)| s * s).fold(0.0, f64::max);
    let (_, ens_std) = mean_std(&mean_prediction(member_predictions));
    let bf = b as f64;
    Ok(VarianceDecomposition {
        members: b,
        avg_variance,
        max_variance,
        avg_correlation,
        ensemble_variance: ens_std * ens_std,
        equal_correlation_approx: avg_variance * (1.0 / bf + (bf - 1.0) / bf * avg_correlation),
    })
}

/// Population covariance.
pub fn covariance(a: &[f64], b: &[f64]) -> f64 {
    let (ma, _) = mean_std(a);
    let (mb, _) = mean_std(b);
    a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / a.len() as f64
}
