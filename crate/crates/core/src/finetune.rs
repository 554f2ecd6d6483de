//! Hyperparameter selection by grid search over validation folds.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::backtest::{sharpe, strategy_returns, BacktestReport};
use crate::cgan::CganModel;
use crate::ensemble::synthetic_series;
use crate::error::{Error, Result};
use crate::resampling::{
    split_block, split_hv_block, split_kfold, split_naive, split_one_split, split_sliding, split_stationary_bootstrap,
    synthetic_horizon, Fold,
};
use crate::rng::derive_seed;
use crate::strategies::{fit, fit_grid, LearnerSpec};
use crate::timeseries::{build_lagged, lagged_holdout, LaggedDataset};

/// How training and validation sets are drawn from the in-sample period.
#[derive(Debug, Clone, Copy)]
pub enum Scheme<'a> {
    Naive,
    OneSplit {
        h: usize,
    },
    Sliding {
        window: usize,
        stride: usize,
    },
    Block {
        block: usize,
    },
    HvBlock {
        block: usize,
        gap: usize,
    },
    KFold {
        k: usize,
    },
    StatBoot {
        b: usize,
        expected_block: f64,
    },
    /// Recursive generator paths, each split chronologically with the final
    /// `h` points (capped at half the path) validating.
    Cgan {
        name: &'a str,
        model: &'a CganModel,
        b: usize,
        h: usize,
    },
}

impl Scheme<'_> {
    pub fn name(&self) -> String {
        match self {
            Scheme::Naive => "naive".into(),
            Scheme::OneSplit { .. } => "one_split".into(),
            Scheme::Sliding { .. } => "sliding".into(),
            Scheme::Block { .. } => "block".into(),
            Scheme::HvBlock { .. } => "hv_block".into(),
            Scheme::KFold { .. } => "kfold".into(),
            Scheme::StatBoot { .. } => "stat_boot".into(),
            Scheme::Cgan { name, .. } => name.to_string(),
        }
    }
}

impl fmt::Display for Scheme<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// A training set and a validation set, both as lagged rows.
#[derive(Debug, Clone)]
pub struct FoldData {
    pub train: LaggedDataset,
    pub val: LaggedDataset,
}

/// Materialise the folds of `scheme` on the in-sample series. Classical
/// schemes index lagged rows of the real series; the generator scheme
/// works entirely on synthetic paths.
pub fn scheme_folds(scheme: &Scheme, in_sample: &[f64], p: usize, seed: u64) -> Result<Vec<FoldData>> {
    if let Scheme::Cgan { model, b, h, .. } = *scheme {
        if b == 0 || h == 0 {
            return Err(Error::param("generator scheme needs b >= 1 and h >= 1"));
        }
        return (0..b)
            .map(|i| {
                let series = synthetic_series(model, in_sample, i, derive_seed(seed, "mv-cgan", 0))?;
                let data = build_lagged(&series, p)?;
                let split = data.len() - synthetic_horizon(data.len(), h);
                Ok(fold_data(
                    &data,
                    &Fold {
                        train: (0..split).collect(),
                        val: (split..data.len()).collect(),
                    },
                ))
            })
            .collect();
    }
    let data = build_lagged(in_sample, p)?;
    let n = data.len();
    let plan = match *scheme {
        Scheme::Naive => split_naive(n)?,
        Scheme::OneSplit { h } => split_one_split(n, h)?,
        Scheme::Sliding { window, stride } => split_sliding(n, window, stride)?,
        Scheme::Block { block } => split_block(n, block)?,
        Scheme::HvBlock { block, gap } => split_hv_block(n, block, gap)?,
        Scheme::KFold { k } => split_kfold(n, k)?,
        Scheme::StatBoot { b, expected_block } => {
            split_stationary_bootstrap(n, b, expected_block, derive_seed(seed, "mv-boot", 0))?
        }
        Scheme::Cgan { .. } => unreachable!(),
    };
    Ok(plan.folds.iter().map(|f| fold_data(&data, f)).collect())
}

fn fold_data(data: &LaggedDataset, fold: &Fold) -> FoldData {
    FoldData {
        train: data.select(&fold.train),
        val: data.select(&fold.val),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub scheme: String,
    pub grid: Vec<LearnerSpec>,
    /// `scores[i][b]`: validation Sharpe of grid entry `i` on fold `b`;
    /// `None` when the fit or the score failed.
    pub scores: Vec<Vec<Option<f64>>>,
    /// Mean over available folds.
    pub mean: Vec<Option<f64>>,
    /// More than half the folds missing.
    pub disqualified: Vec<bool>,
    pub selected: usize,
}

impl GridResult {
    pub fn selected_spec(&self) -> &LearnerSpec {
        &self.grid[self.selected]
    }

    pub fn fold_count(&self) -> usize {
        self.scores.first().map_or(0, Vec::len)
    }

    /// Pick the best mean among qualified entries; ties go to the earlier
    /// grid entry.
    pub fn from_scores(scheme: &str, grid: Vec<LearnerSpec>, scores: Vec<Vec<Option<f64>>>) -> Result<Self> {
        if grid.is_empty() || grid.len() != scores.len() {
            return Err(Error::shape("one score row per grid entry"));
        }
        let mut mean = Vec::with_capacity(grid.len());
        let mut disqualified = Vec::with_capacity(grid.len());
        for row in &scores {
            let present: Vec<f64> = row.iter().flatten().copied().collect();
            let missing = row.len() - present.len();
            disqualified.push(2 * missing > row.len() || present.is_empty());
            mean.push(if present.is_empty() {
                None
            } else {
                Some(present.iter().sum::<f64>() / present.len() as f64)
            });
        }
        let mut selected: Option<usize> = None;
        for i in 0..grid.len() {
            if disqualified[i] {
                continue;
            }
            let m = mean[i].expect("qualified entries have a mean");
            if selected.is_none_or(|s| m > mean[s].unwrap()) {
                selected = Some(i);
            }
        }
        Ok(Self {
            scheme: scheme.to_string(),
            grid,
            scores,
            mean,
            disqualified,
            selected: selected.ok_or(Error::NoValidConfiguration)?,
        })
    }
}

/// Validation Sharpe of every grid entry on every fold of `scheme`.
pub fn grid_search(
    scheme: &Scheme,
    grid: &[LearnerSpec],
    in_sample: &[f64],
    p: usize,
    seed: u64,
) -> Result<GridResult> {
    if grid.is_empty() {
        return Err(Error::param("empty hyperparameter grid"));
    }
    for spec in grid {
        spec.validate()?;
    }
    let folds = scheme_folds(scheme, in_sample, p, seed)?;
    let by_fold: Vec<Vec<Option<f64>>> = folds
        .par_iter()
        .enumerate()
        .map(|(b, fold)| {
            fit_grid(grid, &fold.train, derive_seed(seed, "fold-fit", b as u64))
                .into_iter()
                .map(|model| {
                    let model = model.ok()?;
                    let preds = model.predict(fold.val.features.view()).ok()?;
                    sharpe(&strategy_returns(&fold.val.targets, &preds).ok()?).ok()
                })
                .collect()
        })
        .collect();
    let scores = (0..grid.len())
        .map(|i| by_fold.iter().map(|row| row[i]).collect())
        .collect();
    GridResult::from_scores(&scheme.name(), grid.to_vec(), scores)
}

/// Refit the selected entry on the whole real in-sample series and
/// backtest it on the holdout.
pub fn finalize_and_test(
    result: &GridResult,
    in_sample: &[f64],
    holdout: &[f64],
    p: usize,
    seed: u64,
) -> Result<BacktestReport> {
    let train = build_lagged(in_sample, p)?;
    let test = lagged_holdout(in_sample, holdout, p)?;
    let model = fit(result.selected_spec(), &train, derive_seed(seed, "final-fit", 0))?;
    let preds = model.predict(test.features.view())?;
    BacktestReport::new(&test.targets, &preds)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn specs(n: usize) -> Vec<LearnerSpec> {
        (1..=n).map(|i| LearnerSpec::Ridge { shrinkage: i as f64 }).collect()
    }

    #[test]
    fn ties_go_to_earlier_entry() {
        let r =
            GridResult::from_scores("x", specs(3), vec![vec![Some(1.0)], vec![Some(2.0)], vec![Some(2.0)]]).unwrap();
        assert_eq!(r.selected, 1);
    }

    #[test]
    fn mostly_missing_entries_are_disqualified() {
        let scores = vec![vec![Some(5.0), None, None], vec![Some(1.0), Some(1.0), None]];
        let r = GridResult::from_scores("x", specs(2), scores).unwrap();
        assert_eq!(r.disqualified, vec![true, false]);
        assert_eq!(r.selected, 1);
        assert_eq!(r.mean[0], Some(5.0));
        let none = GridResult::from_scores("x", specs(1), vec![vec![None, None]]);
        assert!(matches!(none, Err(Error::NoValidConfiguration)));
    }

    #[test]
    fn single_entry_grid_selects_it() {
        let x = crate::synthetic::ar1(0.2, 0.01, 300, 3);
        let r = grid_search(&Scheme::OneSplit { h: 60 }, &specs(1), &x, 5, 0).unwrap();
        assert_eq!(r.selected, 0);
        assert_eq!(r.fold_count(), 1);
    }
}
