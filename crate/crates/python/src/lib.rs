//! Python bindings for `cgantune`.

use std::path::PathBuf;

use cgantune::backtest::{self, BacktestReport};
use cgantune::cgan::{train_and_select, CganConfig, CganModel, SampleMode};
use cgantune::config::ExperimentConfig;
use cgantune::ensemble::{build_ensemble, Resampler};
use cgantune::experiment::run_experiment;
use cgantune::finetune::{finalize_and_test, grid_search, Scheme};
use cgantune::resampling::{self, SplitPlan};
use cgantune::stats;
use cgantune::strategies::{self, FittedModel, LearnerSpec};
use cgantune::timeseries::{build_lagged, lagged_holdout};
use ndarray::Array2;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: cgantune::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn matrix(rows: Vec<Vec<f64>>) -> PyResult<Array2<f64>> {
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(PyValueError::new_err("ragged feature matrix"));
    }
    let n = rows.len();
    Array2::from_shape_vec((n, cols), rows.into_iter().flatten().collect())
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

fn report_dict<'py>(py: Python<'py>, r: &BacktestReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("sharpe", r.sharpe)?;
    d.set_item("calmar", r.calmar)?;
    d.set_item("mdd", r.mdd)?;
    d.set_item("rmse", r.rmse)?;
    d.set_item("strat_returns", r.strat_returns.clone())?;
    d.set_item("cum_returns", r.cum_returns.clone())?;
    Ok(d)
}

/// A base-learner specification.
#[pyclass(name = "Learner", frozen, from_py_object)]
#[derive(Clone)]
struct PyLearner {
    spec: LearnerSpec,
}

#[pymethods]
impl PyLearner {
    #[staticmethod]
    fn ridge(shrinkage: f64) -> Self {
        Self {
            spec: LearnerSpec::Ridge { shrinkage },
        }
    }

    #[staticmethod]
    #[pyo3(signature = (min_samples_split=2, max_depth=None))]
    fn reg_tree(min_samples_split: usize, max_depth: Option<usize>) -> Self {
        Self {
            spec: LearnerSpec::RegTree {
                min_samples_split,
                max_depth,
            },
        }
    }

    #[staticmethod]
    fn gbt(n_trees: usize, learning_rate: f64, max_depth: usize) -> Self {
        Self {
            spec: LearnerSpec::Gbt {
                n_trees,
                learning_rate,
                max_depth,
            },
        }
    }

    #[staticmethod]
    #[pyo3(signature = (hidden, weight_decay, epochs=strategies::MLP_EPOCHS, learning_rate=strategies::MLP_LEARNING_RATE, batch_size=strategies::MLP_BATCH_SIZE))]
    fn mlp(hidden: usize, weight_decay: f64, epochs: usize, learning_rate: f64, batch_size: usize) -> Self {
        Self {
            spec: LearnerSpec::Mlp {
                hidden,
                weight_decay,
                epochs,
                learning_rate,
                batch_size,
            },
        }
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.spec.kind().name()
    }

    #[getter]
    fn label(&self) -> String {
        self.spec.label()
    }

    /// Fit on the lagged rows of `returns`.
    #[pyo3(signature = (returns, p, seed=0))]
    fn fit(&self, returns: Vec<f64>, p: usize, seed: u64) -> PyResult<PyModel> {
        let data = build_lagged(&returns, p).map_err(err)?;
        let model = strategies::fit(&self.spec, &data, seed).map_err(err)?;
        Ok(PyModel { model })
    }

    fn __repr__(&self) -> String {
        format!("Learner({})", self.spec.label())
    }
}

/// A fitted base learner.
#[pyclass(name = "Model", frozen)]
struct PyModel {
    model: FittedModel,
}

#[pymethods]
impl PyModel {
    #[getter]
    fn input_dim(&self) -> usize {
        self.model.input_dim()
    }

    /// Predict one value per feature row.
    fn predict(&self, features: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
        self.model.predict(matrix(features)?.view()).map_err(err)
    }
}

/// A trained cGAN with its selected snapshot.
#[pyclass(name = "Cgan", frozen)]
struct PyCgan {
    model: CganModel,
}

#[pymethods]
impl PyCgan {
    #[staticmethod]
    #[pyo3(signature = (returns, p=252, noise_dim=252, hidden=100, epochs=20000, batch_size=252, snap=200, eval_samples=50, learning_rate=0.01, seed=0))]
    #[allow(clippy::too_many_arguments)]
    fn train(
        py: Python<'_>,
        returns: Vec<f64>,
        p: usize,
        noise_dim: usize,
        hidden: usize,
        epochs: usize,
        batch_size: usize,
        snap: usize,
        eval_samples: usize,
        learning_rate: f64,
        seed: u64,
    ) -> PyResult<Self> {
        let cfg = CganConfig {
            p,
            noise_dim,
            gen_hidden: hidden,
            disc_hidden: hidden,
            epochs,
            batch_size,
            snap,
            eval_samples,
            learning_rate,
        };
        let model = py.detach(|| train_and_select(&returns, &cfg, seed)).map_err(err)?;
        Ok(Self { model })
    }

    #[staticmethod]
    fn load(dir: PathBuf) -> PyResult<Self> {
        Ok(Self {
            model: CganModel::load(&dir).map_err(err)?,
        })
    }

    fn save(&self, dir: PathBuf) -> PyResult<()> {
        self.model.save(&dir).map_err(err)
    }

    #[getter]
    fn p(&self) -> usize {
        self.model.p()
    }

    #[getter]
    fn selected_epoch(&self) -> usize {
        self.model.selected.epoch
    }

    /// `(epoch, rmse)` for every snapshot.
    #[getter]
    fn curve(&self) -> Vec<(usize, f64)> {
        self.model.rmse_curve()
    }

    #[pyo3(signature = (returns, n, seed=0, mode="recursive"))]
    fn sample_paths(&self, returns: Vec<f64>, n: usize, seed: u64, mode: &str) -> PyResult<Vec<Vec<f64>>> {
        let mode: SampleMode = mode.parse().map_err(err)?;
        self.model.sample_paths(&returns, mode, n, seed).map_err(err)
    }

    #[pyo3(signature = (returns, samples=50, seed=0))]
    fn sample_rmse(&self, returns: Vec<f64>, samples: usize, seed: u64) -> PyResult<f64> {
        self.model.sample_rmse(&returns, samples, seed).map_err(err)
    }
}

#[pyfunction]
#[pyo3(signature = (phi, sigma, n, seed=0))]
fn ar1(phi: f64, sigma: f64, n: usize, seed: u64) -> Vec<f64> {
    cgantune::synthetic::ar1(phi, sigma, n, seed)
}

/// Feature rows and targets of the `p`-lag design.
#[pyfunction]
fn lagged(returns: Vec<f64>, p: usize) -> PyResult<(Vec<Vec<f64>>, Vec<f64>)> {
    let d = build_lagged(&returns, p).map_err(err)?;
    let rows = d.features.rows().into_iter().map(|r| r.to_vec()).collect();
    Ok((rows, d.targets))
}

#[pyfunction]
fn sharpe(returns: Vec<f64>) -> PyResult<f64> {
    backtest::sharpe(&returns).map_err(err)
}

#[pyfunction]
fn max_drawdown(returns: Vec<f64>) -> PyResult<f64> {
    backtest::max_drawdown(&returns).map_err(err)
}

#[pyfunction]
fn calmar(returns: Vec<f64>) -> PyResult<f64> {
    backtest::calmar(&returns).map_err(err)
}

#[pyfunction]
fn rmse(actual: Vec<f64>, predicted: Vec<f64>) -> PyResult<f64> {
    backtest::rmse(&actual, &predicted).map_err(err)
}

/// Sign-strategy backtest of `predicted` against `actual`.
#[pyfunction]
fn backtest_report<'py>(py: Python<'py>, actual: Vec<f64>, predicted: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
    report_dict(py, &BacktestReport::new(&actual, &predicted).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (n, expected_block, seed=0))]
fn stationary_bootstrap(n: usize, expected_block: f64, seed: u64) -> PyResult<Vec<usize>> {
    Ok(resampling::stationary_bootstrap(n, expected_block, seed)
        .map_err(err)?
        .indices)
}

/// `(train, val)` index lists of a classical validation scheme.
#[pyfunction]
#[pyo3(signature = (scheme, n, h=None, window=None, stride=None, block=None, gap=0, k=None, b=None, expected_block=20.0, seed=0))]
#[allow(clippy::too_many_arguments)]
fn split(
    scheme: &str,
    n: usize,
    h: Option<usize>,
    window: Option<usize>,
    stride: Option<usize>,
    block: Option<usize>,
    gap: usize,
    k: Option<usize>,
    b: Option<usize>,
    expected_block: f64,
    seed: u64,
) -> PyResult<Vec<(Vec<usize>, Vec<usize>)>> {
    let need = |v: Option<usize>, name: &str| v.ok_or_else(|| PyValueError::new_err(format!("{scheme} needs {name}")));
    let plan: SplitPlan = match scheme {
        "naive" => resampling::split_naive(n),
        "one_split" => resampling::split_one_split(n, need(h, "h")?),
        "sliding" => resampling::split_sliding(n, need(window, "window")?, need(stride, "stride")?),
        "block" => resampling::split_block(n, need(block, "block")?),
        "hv_block" => resampling::split_hv_block(n, need(block, "block")?, gap),
        "kfold" => resampling::split_kfold(n, need(k, "k")?),
        "stat_boot" => resampling::split_stationary_bootstrap(n, need(b, "b")?, expected_block, seed),
        other => return Err(PyValueError::new_err(format!("unknown scheme {other:?}"))),
    }
    .map_err(err)?;
    Ok(plan.folds.into_iter().map(|f| (f.train, f.val)).collect())
}

/// Bag `b` members and backtest the running ensemble on `holdout`; one
/// report per ensemble size `1..=b`.
#[pyfunction]
#[pyo3(signature = (learner, in_sample, holdout, p, b, seed=0, generator=None, expected_block=20.0))]
#[allow(clippy::too_many_arguments)]
fn ensemble_reports<'py>(
    py: Python<'py>,
    learner: PyLearner,
    in_sample: Vec<f64>,
    holdout: Vec<f64>,
    p: usize,
    b: usize,
    seed: u64,
    generator: Option<PyRef<'py, PyCgan>>,
    expected_block: f64,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let resampler = match &generator {
        Some(g) => Resampler::Cgan {
            name: "cgan",
            model: &g.model,
        },
        None => Resampler::StatBoot { expected_block },
    };
    let test = lagged_holdout(&in_sample, &holdout, p).map_err(err)?;
    let reports = py
        .detach(|| build_ensemble(&resampler, &learner.spec, &in_sample, p, b, seed)?.incremental_reports(&test))
        .map_err(err)?;
    reports.iter().map(|r| report_dict(py, r)).collect()
}

/// Select a grid entry by mean validation Sharpe under `scheme`, refit it
/// on all of `in_sample` and backtest on `holdout`.
#[pyfunction]
#[pyo3(signature = (scheme, grid, in_sample, holdout, p, seed=0, h=1260, window=252, stride=252, block=252, gap=10, k=10, b=100, expected_block=20.0, generator=None))]
#[allow(clippy::too_many_arguments)]
fn finetune<'py>(
    py: Python<'py>,
    scheme: &str,
    grid: Vec<PyLearner>,
    in_sample: Vec<f64>,
    holdout: Vec<f64>,
    p: usize,
    seed: u64,
    h: usize,
    window: usize,
    stride: usize,
    block: usize,
    gap: usize,
    k: usize,
    b: usize,
    expected_block: f64,
    generator: Option<PyRef<'py, PyCgan>>,
) -> PyResult<Bound<'py, PyDict>> {
    let scheme = match (scheme, &generator) {
        ("naive", _) => Scheme::Naive,
        ("one_split", _) => Scheme::OneSplit { h },
        ("sliding", _) => Scheme::Sliding { window, stride },
        ("block", _) => Scheme::Block { block },
        ("hv_block", _) => Scheme::HvBlock { block, gap },
        ("kfold", _) => Scheme::KFold { k },
        ("stat_boot", _) => Scheme::StatBoot { b, expected_block },
        ("cgan", Some(g)) => Scheme::Cgan {
            name: "cgan",
            model: &g.model,
            b,
            h,
        },
        ("cgan", None) => return Err(PyValueError::new_err("the cgan scheme needs a generator")),
        (other, _) => return Err(PyValueError::new_err(format!("unknown scheme {other:?}"))),
    };
    let specs: Vec<LearnerSpec> = grid.into_iter().map(|l| l.spec).collect();
    let (result, report) = py
        .detach(|| {
            let result = grid_search(&scheme, &specs, &in_sample, p, seed)?;
            let report = finalize_and_test(&result, &in_sample, &holdout, p, seed)?;
            Ok((result, report))
        })
        .map_err(err)?;
    let d = report_dict(py, &report)?;
    d.set_item("selected", result.selected)?;
    d.set_item("selected_label", result.selected_spec().label())?;
    d.set_item("mean_scores", result.mean)?;
    d.set_item("scores", result.scores)?;
    d.set_item("disqualified", result.disqualified)?;
    Ok(d)
}

#[pyfunction]
fn wilcoxon_rank_sum(a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
    stats::wilcoxon_rank_sum(&a, &b).map_err(err)
}

/// Rows are blocks, columns methods; the largest value in a row ranks 1.
#[pyfunction]
fn friedman_test<'py>(py: Python<'py>, matrix: Vec<Vec<f64>>) -> PyResult<Bound<'py, PyDict>> {
    let r = stats::friedman_test(&matrix).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("rows", r.rows)?;
    d.set_item("rank_sums", r.rank_sums)?;
    d.set_item("avg_ranks", r.avg_ranks)?;
    d.set_item("chi2", r.chi2)?;
    d.set_item("p_value", r.p_value)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (m, alpha=0.05))]
fn holm_thresholds(m: usize, alpha: f64) -> Vec<f64> {
    stats::holm_thresholds(m, alpha)
}

#[pyfunction]
fn default_config() -> PyResult<String> {
    ExperimentConfig::default().to_toml().map_err(err)
}

/// Run an experiment config file; returns the run summary.
#[pyfunction]
#[pyo3(signature = (path, seed=None))]
fn run<'py>(py: Python<'py>, path: PathBuf, seed: Option<u64>) -> PyResult<Bound<'py, PyDict>> {
    let mut cfg = ExperimentConfig::load(&path).map_err(err)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let info = py.detach(|| run_experiment(&cfg)).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("config_hash", info.config_hash)?;
    d.set_item("assets", info.assets)?;
    d.set_item("failed_assets", info.failed_assets)?;
    d.set_item("failures", info.failures)?;
    d.set_item("output_dir", cfg.output_dir)?;
    Ok(d)
}

#[pymodule]
fn pycgantune(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLearner>()?;
    m.add_class::<PyModel>()?;
    m.add_class::<PyCgan>()?;
    m.add_function(wrap_pyfunction!(ar1, m)?)?;
    m.add_function(wrap_pyfunction!(lagged, m)?)?;
    m.add_function(wrap_pyfunction!(sharpe, m)?)?;
    m.add_function(wrap_pyfunction!(max_drawdown, m)?)?;
    m.add_function(wrap_pyfunction!(calmar, m)?)?;
    m.add_function(wrap_pyfunction!(rmse, m)?)?;
    m.add_function(wrap_pyfunction!(backtest_report, m)?)?;
    m.add_function(wrap_pyfunction!(stationary_bootstrap, m)?)?;
    m.add_function(wrap_pyfunction!(split, m)?)?;
    m.add_function(wrap_pyfunction!(ensemble_reports, m)?)?;
    m.add_function(wrap_pyfunction!(finetune, m)?)?;
    m.add_function(wrap_pyfunction!(wilcoxon_rank_sum, m)?)?;
    m.add_function(wrap_pyfunction!(friedman_test, m)?)?;
    m.add_function(wrap_pyfunction!(holm_thresholds, m)?)?;
    m.add_function(wrap_pyfunction!(default_config, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
