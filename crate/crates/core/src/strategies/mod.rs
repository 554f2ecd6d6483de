//! Supervised learners mapping lagged returns to the next return.

mod gbt;
mod mlp;
mod ridge;
mod tree;

pub use gbt::GbtModel;
pub use mlp::MlpModel;
pub use ridge::RidgeModel;
pub use tree::{Node, RegressionTree};

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::timeseries::LaggedDataset;

pub const RIDGE_SHRINKAGE: [f64; 11] = [
    0.00001, 0.00005, 0.0001, 0.0005, 0.001, 0.005, 0.01, 0.05, 0.1, 0.5, 1.0,
];
pub const GBT_TREES: [usize; 3] = [50, 100, 200];
pub const GBT_LEARNING_RATES: [f64; 5] = [0.0001, 0.001, 0.01, 0.1, 1.0];
pub const GBT_DEPTHS: [usize; 3] = [1, 3, 5];
pub const MLP_NEURONS: [usize; 4] = [20, 50, 100, 200];
pub const MLP_WEIGHT_DECAY: [f64; 4] = [0.001, 0.01, 0.1, 1.0];

pub const MLP_EPOCHS: usize = 200;
pub const MLP_LEARNING_RATE: f64 = 0.01;
pub const MLP_BATCH_SIZE: usize = 252;

fn default_mlp_epochs() -> usize {
    MLP_EPOCHS
}

fn default_mlp_learning_rate() -> f64 {
    MLP_LEARNING_RATE
}

fn default_mlp_batch_size() -> usize {
    MLP_BATCH_SIZE
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    Ridge,
    RegTree,
    Gbt,
    Mlp,
}

impl LearnerKind {
    pub fn name(self) -> &'static str {
        match self {
            LearnerKind::Ridge => "ridge",
            LearnerKind::RegTree => "reg_tree",
            LearnerKind::Gbt => "gbt",
            LearnerKind::Mlp => "mlp",
        }
    }

    /// The tuning grid, in listing order (earlier entries win ties).
    pub fn default_grid(self) -> Vec<LearnerSpec> {
        match self {
            LearnerKind::Ridge => RIDGE_SHRINKAGE
                .iter()
                .map(|&shrinkage| LearnerSpec::Ridge { shrinkage })
                .collect(),
            LearnerKind::RegTree => vec![LearnerSpec::reg_tree()],
            LearnerKind::Gbt => gbt_grid(&GBT_TREES, &GBT_LEARNING_RATES, &GBT_DEPTHS),
            LearnerKind::Mlp => mlp_grid(&MLP_NEURONS, &MLP_WEIGHT_DECAY),
        }
    }
}

impl fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for LearnerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "ridge" => Ok(LearnerKind::Ridge),
            "reg_tree" | "tree" => Ok(LearnerKind::RegTree),
            "gbt" => Ok(LearnerKind::Gbt),
            "mlp" => Ok(LearnerKind::Mlp),
            _ => Err(Error::param(format!("unknown learner {s:?}"))),
        }
    }
}

pub fn gbt_grid(trees: &[usize], learning_rates: &[f64], depths: &[usize]) -> Vec<LearnerSpec> {
    let mut grid = Vec::new();
    for &n_trees in trees {
        for &learning_rate in learning_rates {
            for &max_depth in depths {
                grid.push(LearnerSpec::Gbt {
                    n_trees,
                    learning_rate,
                    max_depth,
                });
            }
        }
    }
    grid
}

pub fn mlp_grid(neurons: &[usize], weight_decays: &[f64]) -> Vec<LearnerSpec> {
    let mut grid = Vec::new();
    for &hidden in neurons {
        for &weight_decay in weight_decays {
            grid.push(LearnerSpec::mlp(hidden, weight_decay));
        }
    }
    grid
}

/// A learner and its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LearnerSpec {
    Ridge {
        shrinkage: f64,
    },
    RegTree {
        min_samples_split: usize,
        max_depth: Option<usize>,
    },
    Gbt {
        n_trees: usize,
        learning_rate: f64,
        max_depth: usize,
    },
    /// Tanh hidden layer, linear output.
    Mlp {
        hidden: usize,
        weight_decay: f64,
        #[serde(default = "default_mlp_epochs")]
        epochs: usize,
        #[serde(default = "default_mlp_learning_rate")]
        learning_rate: f64,
        #[serde(default = "default_mlp_batch_size")]
        batch_size: usize,
    },
}

impl LearnerSpec {
    /// Fully grown tree splitting any node with at least two samples.
    pub fn reg_tree() -> Self {
        LearnerSpec::RegTree {
            min_samples_split: 2,
            max_depth: None,
        }
    }

    pub fn mlp(hidden: usize, weight_decay: f64) -> Self {
        LearnerSpec::Mlp {
            hidden,
            weight_decay,
            epochs: MLP_EPOCHS,
            learning_rate: MLP_LEARNING_RATE,
            batch_size: MLP_BATCH_SIZE,
        }
    }

    pub fn kind(&self) -> LearnerKind {
        match self {
            LearnerSpec::Ridge { .. } => LearnerKind::Ridge,
            LearnerSpec::RegTree { .. } => LearnerKind::RegTree,
            LearnerSpec::Gbt { .. } => LearnerKind::Gbt,
            LearnerSpec::Mlp { .. } => LearnerKind::Mlp,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            LearnerSpec::Ridge { shrinkage } => shrinkage > 0.0 && shrinkage.is_finite(),
            LearnerSpec::RegTree {
                min_samples_split,
                max_depth,
            } => min_samples_split >= 2 && max_depth != Some(0),
            LearnerSpec::Gbt {
                n_trees,
                learning_rate,
                max_depth,
            } => n_trees >= 1 && learning_rate > 0.0 && learning_rate <= 1.0 && max_depth >= 1,
            LearnerSpec::Mlp {
                hidden,
                weight_decay,
                epochs,
                learning_rate,
                batch_size,
            } => {
                hidden >= 1
                    && weight_decay >= 0.0
                    && weight_decay.is_finite()
                    && epochs >= 1
                    && learning_rate > 0.0
                    && learning_rate.is_finite()
                    && batch_size >= 1
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::param(format!("illegal learner spec {self:?}")))
        }
    }

    pub fn params(&self) -> BTreeMap<String, f64> {
        let pairs: Vec<(&str, f64)> = match *self {
            LearnerSpec::Ridge { shrinkage } => vec![("shrinkage", shrinkage)],
            LearnerSpec::RegTree {
                min_samples_split,
                max_depth,
            } => {
                let mut v = vec![("min_samples_split", min_samples_split as f64)];
                if let Some(d) = max_depth {
                    v.push(("max_depth", d as f64));
                }
                v
            }
            LearnerSpec::Gbt {
                n_trees,
                learning_rate,
                max_depth,
            } => vec![
                ("n_trees", n_trees as f64),
                ("learning_rate", learning_rate),
                ("max_depth", max_depth as f64),
            ],
            LearnerSpec::Mlp {
                hidden, weight_decay, ..
            } => vec![("neurons", hidden as f64), ("weight_decay", weight_decay)],
        };
        pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }

    /// Compact, stable identifier such as `gbt(n_trees=50,learning_rate=0.1,max_depth=3)`.
    pub fn label(&self) -> String {
        let body = match *self {
            LearnerSpec::Ridge { shrinkage } => format!("shrinkage={shrinkage}"),
            LearnerSpec::RegTree {
                min_samples_split,
                max_depth,
            } => match max_depth {
                Some(d) => format!("min_samples_split={min_samples_split},max_depth={d}"),
                None => format!("min_samples_split={min_samples_split}"),
            },
            LearnerSpec::Gbt {
                n_trees,
                learning_rate,
                max_depth,
            } => format!("n_trees={n_trees},learning_rate={learning_rate},max_depth={max_depth}"),
            LearnerSpec::Mlp {
                hidden, weight_decay, ..
            } => format!("neurons={hidden},weight_decay={weight_decay},activation=tanh"),
        };
        format!("{}({body})", self.kind())
    }
}

impl fmt::Display for LearnerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FittedModel {
    /// Fitted to a target with no spread.
    Constant {
        width: usize,
        value: f64,
    },
    Ridge(RidgeModel),
    RegTree(RegressionTree),
    Gbt(GbtModel),
    Mlp(MlpModel),
}

impl FittedModel {
    pub fn input_dim(&self) -> usize {
        match self {
            FittedModel::Constant { width, .. } => *width,
            FittedModel::Ridge(m) => m.coefficients.len(),
            FittedModel::RegTree(m) => m.input_dim(),
            FittedModel::Gbt(m) => m.input_dim(),
            FittedModel::Mlp(m) => m.input_dim(),
        }
    }

    pub fn predict_row(&self, x: ArrayView1<f64>) -> Result<f64> {
        if x.len() != self.input_dim() {
            return Err(Error::shape(format!(
                "model expects {} features, got {}",
                self.input_dim(),
                x.len()
            )));
        }
        Ok(match self {
            FittedModel::Constant { value, .. } => *value,
            FittedModel::Ridge(m) => m.predict_row(x),
            FittedModel::RegTree(m) => m.predict_row(x),
            FittedModel::Gbt(m) => m.predict_row(x),
            FittedModel::Mlp(m) => m.predict(x.insert_axis(Axis(0)))?[0],
        })
    }

    pub fn predict(&self, features: ArrayView2<f64>) -> Result<Vec<f64>> {
        if features.ncols() != self.input_dim() {
            return Err(Error::shape(format!(
                "model expects {} features, got {}",
                self.input_dim(),
                features.ncols()
            )));
        }
        match self {
            FittedModel::Mlp(m) => m.predict(features),
            _ => features.rows().into_iter().map(|r| self.predict_row(r)).collect(),
        }
    }
}

/// Fit `spec` on `data`. Rows are put into a canonical order first, so the
/// result does not depend on the order rows arrive in.
pub fn fit(spec: &LearnerSpec, data: &LaggedDataset, seed: u64) -> Result<FittedModel> {
    spec.validate()?;
    if data.is_empty() {
        return Err(Error::param("cannot fit on an empty dataset"));
    }
    if data.features.nrows() != data.targets.len() {
        return Err(Error::shape("features and targets differ in length"));
    }
    if let Some(i) = data.targets.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index: i });
    }
    if data.features.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index: 0 });
    }
    let first = data.targets[0];
    if data.targets.iter().all(|&y| y == first) {
        return Ok(FittedModel::Constant {
            width: data.features.ncols(),
            value: first,
        });
    }
    let (x, y) = canonical_rows(data.features.view(), &data.targets);
    Ok(match *spec {
        LearnerSpec::Ridge { shrinkage } => FittedModel::Ridge(RidgeModel::fit(x.view(), &y, shrinkage)?),
        LearnerSpec::RegTree {
            min_samples_split,
            max_depth,
        } => FittedModel::RegTree(RegressionTree::fit(x.view(), &y, min_samples_split, max_depth)),
        LearnerSpec::Gbt {
            n_trees,
            learning_rate,
            max_depth,
        } => FittedModel::Gbt(GbtModel::fit(x.view(), &y, n_trees, learning_rate, max_depth)),
        LearnerSpec::Mlp {
            hidden,
            weight_decay,
            epochs,
            learning_rate,
            batch_size,
        } => FittedModel::Mlp(MlpModel::fit(
            x.view(),
            &y,
            hidden,
            weight_decay,
            epochs,
            learning_rate,
            batch_size,
            seed,
        )?),
    })
}

/// Fit every entry of `grid`. Boosting entries that differ only in tree
/// count share one fit at the largest count.
pub fn fit_grid(grid: &[LearnerSpec], data: &LaggedDataset, seed: u64) -> Vec<Result<FittedModel>> {
    let mut boosted: BTreeMap<(u64, usize), Result<FittedModel>> = BTreeMap::new();
    for spec in grid {
        if let LearnerSpec::Gbt {
            n_trees,
            learning_rate,
            max_depth,
        } = *spec
        {
            let key = (learning_rate.to_bits(), max_depth);
            let most = grid
                .iter()
                .filter_map(|s| match *s {
                    LearnerSpec::Gbt {
                        n_trees: n,
                        learning_rate: lr,
                        max_depth: d,
                    } if (lr.to_bits(), d) == key => Some(n),
                    _ => None,
                })
                .max()
                .unwrap_or(n_trees);
            boosted.entry(key).or_insert_with(|| {
                fit(
                    &LearnerSpec::Gbt {
                        n_trees: most,
                        learning_rate,
                        max_depth,
                    },
                    data,
                    seed,
                )
            });
        }
    }
    grid.iter()
        .map(|spec| match *spec {
            LearnerSpec::Gbt {
                n_trees,
                learning_rate,
                max_depth,
            } => {
                spec.validate()?;
                match &boosted[&(learning_rate.to_bits(), max_depth)] {
                    Ok(FittedModel::Gbt(m)) => Ok(FittedModel::Gbt(m.truncated(n_trees))),
                    Ok(other) => Ok(other.clone()),
                    Err(e) => Err(Error::param(format!("{spec}: {e}"))),
                }
            }
            _ => fit(spec, data, seed),
        })
        .collect()
}

/// Rows sorted lexicographically by features, then target.
fn canonical_rows(x: ArrayView2<f64>, y: &[f64]) -> (Array2<f64>, Vec<f64>) {
    let mut order: Vec<usize> = (0..y.len()).collect();
    order.sort_by(|&a, &b| {
        for (u, v) in x.row(a).iter().zip(x.row(b).iter()) {
            match u.total_cmp(v) {
                Ordering::Equal => continue,
                other => return other,
            }
        }
        y[a].total_cmp(&y[b])
    });
    (x.select(Axis(0), &order), order.iter().map(|&i| y[i]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic;
    use crate::timeseries::build_lagged;

    #[test]
    fn grids_follow_listing_order() {
        let gbt = LearnerKind::Gbt.default_grid();
        assert_eq!(gbt.len(), 45);
        assert_eq!(
            gbt[1],
            LearnerSpec::Gbt {
                n_trees: 50,
                learning_rate: 0.0001,
                max_depth: 3
            }
        );
        assert_eq!(LearnerKind::Mlp.default_grid().len(), 16);
        assert_eq!(LearnerKind::Ridge.default_grid().len(), 11);
        assert!(LearnerKind::Gbt.default_grid().iter().all(|s| s.validate().is_ok()));
    }

    #[test]
    fn illegal_specs_rejected() {
        assert!(LearnerSpec::Ridge { shrinkage: 0.0 }.validate().is_err());
        assert!(LearnerSpec::RegTree {
            min_samples_split: 1,
            max_depth: None
        }
        .validate()
        .is_err());
        assert!(LearnerSpec::Gbt {
            n_trees: 10,
            learning_rate: 1.5,
            max_depth: 1
        }
        .validate()
        .is_err());
    }

    #[test]
    fn spec_serde_carries_kind_tag() {
        let spec = LearnerSpec::mlp(20, 0.1);
        let json = serde_json::to_string(&spec).unwrap();
        assert!(json.contains("\"kind\":\"mlp\""));
        let back: LearnerSpec = serde_json::from_str(r#"{"kind":"mlp","hidden":20,"weight_decay":0.1}"#).unwrap();
        assert_eq!(back, spec);
        assert_eq!(spec.label(), "mlp(neurons=20,weight_decay=0.1,activation=tanh)");
    }

    #[test]
    fn constant_target_gives_constant_prediction() {
        let x = synthetic::white_noise(60, 1.0, 2);
        let mut data = build_lagged(&x, 4).unwrap();
        data.targets.iter_mut().for_each(|t| *t = 0.1);
        let specs = [
            LearnerSpec::Ridge { shrinkage: 1.0 },
            LearnerSpec::reg_tree(),
            LearnerSpec::Gbt {
                n_trees: 5,
                learning_rate: 0.1,
                max_depth: 2,
            },
            LearnerSpec::mlp(3, 0.01),
        ];
        for spec in &specs {
            let m = fit(spec, &data, 1).unwrap();
            assert!(m.predict(data.features.view()).unwrap().iter().all(|&p| p == 0.1));
        }
    }

    #[test]
    fn width_mismatch_is_an_error() {
        let x = synthetic::white_noise(60, 1.0, 2);
        let data = build_lagged(&x, 4).unwrap();
        let m = fit(&LearnerSpec::Ridge { shrinkage: 0.1 }, &data, 0).unwrap();
        assert!(m.predict(Array2::zeros((2, 3)).view()).is_err());
        assert!(fit(&LearnerSpec::reg_tree(), &data.select(&[]), 0).is_err());
    }

    #[test]
    fn every_learner_ignores_row_order() {
        let x = synthetic::ar1(0.5, 1.0, 120, 4);
        let data = build_lagged(&x, 3).unwrap();
        let mut rev: Vec<usize> = (0..data.len()).collect();
        rev.reverse();
        let shuffled = data.select(&rev);
        let specs = [
            LearnerSpec::Ridge { shrinkage: 0.01 },
            LearnerSpec::reg_tree(),
            LearnerSpec::Gbt {
                n_trees: 10,
                learning_rate: 0.1,
                max_depth: 3,
            },
            LearnerSpec::Mlp {
                hidden: 4,
                weight_decay: 0.01,
                epochs: 5,
                learning_rate: 0.01,
                batch_size: 16,
            },
        ];
        for spec in &specs {
            assert_eq!(fit(spec, &data, 9).unwrap(), fit(spec, &shuffled, 9).unwrap(), "{spec}");
        }
    }

    #[test]
    fn grid_fit_matches_individual_fits() {
        let x = synthetic::ar1(0.5, 1.0, 90, 8);
        let data = build_lagged(&x, 3).unwrap();
        let mut grid = gbt_grid(&[2, 5], &[0.1, 1.0], &[1, 2]);
        grid.push(LearnerSpec::Ridge { shrinkage: 0.5 });
        let shared = fit_grid(&grid, &data, 3);
        for (spec, m) in grid.iter().zip(shared) {
            assert_eq!(m.unwrap(), fit(spec, &data, 3).unwrap(), "{spec}");
        }
    }

    #[test]
    fn fitted_models_roundtrip_through_json() {
        let x = synthetic::ar1(0.5, 1.0, 80, 4);
        let data = build_lagged(&x, 3).unwrap();
        for spec in [
            LearnerSpec::Ridge { shrinkage: 0.01 },
            LearnerSpec::reg_tree(),
            LearnerSpec::Gbt {
                n_trees: 3,
                learning_rate: 0.5,
                max_depth: 2,
            },
            LearnerSpec::mlp(3, 0.0),
        ] {
            let m = fit(&spec, &data, 1).unwrap();
            let back: FittedModel = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
            assert_eq!(back, m);
        }
    }
}
