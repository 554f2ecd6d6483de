//! Config-driven runs over many assets, plus report aggregation and
//! generator diagnostics.

use std::collections::BTreeMap;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::backtest::ReportRow;
use crate::cgan::{train_and_select, CganModel, SampleMode, SizeClass};
use crate::config::{cgan_size, ExperimentConfig, SCHEMA_VERSION};
use crate::ensemble::{build_ensemble, Resampler};
use crate::error::{Error, Result};
use crate::finetune::{finalize_and_test, grid_search, GridResult, Scheme};
use crate::rng::derive_seed;
use crate::stats::{rank_table, robust_summary, wilcoxon_rank_sum, RankTable};
use crate::timeseries::io::load_returns;
use crate::timeseries::{acf, ci_bounds, lagged_holdout, pacf};

pub const CASE1_REPORTS: &str = "case1_reports.csv";
pub const CASE1_CURVES: &str = "case1_curves.csv";
pub const CASE1_SUMMARY: &str = "case1_summary.csv";
pub const CASE2_REPORTS: &str = "case2_reports.csv";
pub const CASE2_GRIDS: &str = "case2_grids.json";
pub const CASE2_QUANTILES: &str = "case2_quantiles.csv";
pub const CASE2_RANKS: &str = "case2_ranks.json";
pub const CGAN_CURVES: &str = "cgan_curves.csv";
pub const FAILURES: &str = "failures.json";
pub const RUN_INFO: &str = "run.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub asset: String,
    pub stage: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRecord {
    pub asset: String,
    pub learner: String,
    pub result: GridResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CganCurveRow {
    pub asset: String,
    pub size: String,
    pub epoch: usize,
    pub rmse: f64,
    pub selected: bool,
}

/// Everything produced for one asset.
#[derive(Debug, Clone, Default)]
pub struct AssetOutcome {
    pub case1: Vec<ReportRow>,
    pub curves: Vec<ReportRow>,
    pub case2: Vec<ReportRow>,
    pub grids: Vec<GridRecord>,
    pub cgan_curves: Vec<CganCurveRow>,
    pub failures: Vec<Failure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub schema_version: u32,
    pub config_hash: String,
    pub assets: Vec<String>,
    pub failed_assets: Vec<String>,
    pub failures: usize,
}

/// Run every enabled case on every asset and write the reports. Asset
/// failures are recorded, not propagated.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunInfo> {
    config.validate()?;
    let hash = config.hash();
    let work = || -> Vec<AssetOutcome> {
        config
            .assets
            .par_iter()
            .map(|asset| {
                let outcome = catch_unwind(AssertUnwindSafe(|| run_asset(config, &asset.name, &asset.path)));
                outcome.unwrap_or_else(|panic| {
                    let msg = panic
                        .downcast_ref::<String>()
                        .cloned()
                        .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                        .unwrap_or_else(|| "panic".to_string());
                    AssetOutcome {
                        failures: vec![Failure {
                            asset: asset.name.clone(),
                            stage: "asset".into(),
                            error: msg,
                        }],
                        ..Default::default()
                    }
                })
            })
            .collect()
    };
    let outcomes = if config.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(work)
    } else {
        work()
    };

    let mut merged = AssetOutcome::default();
    for o in outcomes {
        merged.case1.extend(o.case1);
        merged.curves.extend(o.curves);
        merged.case2.extend(o.case2);
        merged.grids.extend(o.grids);
        merged.cgan_curves.extend(o.cgan_curves);
        merged.failures.extend(o.failures);
    }
    for row in merged
        .case1
        .iter_mut()
        .chain(&mut merged.curves)
        .chain(&mut merged.case2)
    {
        row.config_hash = hash.clone();
    }

    let out = &config.output_dir;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    if config.case1.enabled {
        write_rows(&out.join(CASE1_REPORTS), &merged.case1)?;
        write_rows(&out.join(CASE1_CURVES), &merged.curves)?;
        write_csv(&out.join(CASE1_SUMMARY), &case1_summary(&merged.case1))?;
    }
    if config.case2.enabled {
        write_rows(&out.join(CASE2_REPORTS), &merged.case2)?;
        write_json(&out.join(CASE2_GRIDS), &merged.grids)?;
        write_csv(&out.join(CASE2_QUANTILES), &case2_quantiles(&merged.case2))?;
        write_json(&out.join(CASE2_RANKS), &case2_ranks(&merged.case2, config.case2.alpha))?;
    }
    write_csv(&out.join(CGAN_CURVES), &merged.cgan_curves)?;
    write_json(&out.join(FAILURES), &merged.failures)?;
    let mut failed: Vec<String> = merged.failures.iter().map(|f| f.asset.clone()).collect();
    failed.dedup();
    let info = RunInfo {
        schema_version: SCHEMA_VERSION,
        config_hash: hash,
        assets: config.assets.iter().map(|a| a.name.clone()).collect(),
        failed_assets: failed,
        failures: merged.failures.len(),
    };
    write_json(&out.join(RUN_INFO), &info)?;
    Ok(info)
}

fn run_asset(config: &ExperimentConfig, name: &str, path: &Path) -> AssetOutcome {
    let mut out = AssetOutcome::default();
    let fail = |out: &mut AssetOutcome, stage: String, e: Error| {
        out.failures.push(Failure {
            asset: name.to_string(),
            stage,
            error: e.to_string(),
        })
    };
    let series = match load_returns(path).and_then(|s| s.split_holdout(config.holdout)) {
        Ok(s) => s,
        Err(e) => {
            fail(&mut out, "load".into(), e);
            return out;
        }
    };
    let (in_sample, holdout) = (series.0.values().to_vec(), series.1.values().to_vec());
    let seed = derive_seed(config.seed, &format!("asset:{name}"), 0);
    let p = config.lags;

    let mut models: BTreeMap<SizeClass, CganModel> = BTreeMap::new();
    for size in config.cgan_sizes() {
        let cfg = config.cgan_config(size);
        match train_and_select(&in_sample, &cfg, derive_seed(seed, &format!("cgan:{}", size.name()), 0)) {
            Ok(m) => {
                for r in &m.curve {
                    out.cgan_curves.push(CganCurveRow {
                        asset: name.to_string(),
                        size: size.name().to_string(),
                        epoch: r.epoch,
                        rmse: r.rmse,
                        selected: r.epoch == m.selected.epoch,
                    });
                }
                models.insert(size, m);
            }
            Err(e) => fail(&mut out, format!("cgan_{}", size.name()), e),
        }
    }

    if config.case1.enabled {
        let max_b = config.case1.b_values.iter().copied().max().unwrap_or(0);
        let test = lagged_holdout(&in_sample, &holdout, p);
        for rs_name in &config.case1.resamplers {
            let resampler = match cgan_size(rs_name) {
                None => Resampler::StatBoot {
                    expected_block: config.case1.block,
                },
                Some(size) => match models.get(&size) {
                    Some(model) => Resampler::Cgan { name: rs_name, model },
                    None => continue,
                },
            };
            for spec in &config.case1.learners {
                let strategy = spec.kind().name();
                let stage = format!("case1:{rs_name}:{strategy}");
                let cell_seed = derive_seed(seed, &stage, 0);
                let result = test.as_ref().map_err(|e| Error::param(e.to_string())).and_then(|test| {
                    let ens = build_ensemble(&resampler, spec, &in_sample, p, max_b, cell_seed)?;
                    ens.incremental_reports(test)
                });
                match result {
                    Ok(reports) => {
                        for (i, rep) in reports.iter().enumerate() {
                            let row = ReportRow::new(name, rs_name, strategy, i + 1, rep);
                            if config.case1.b_values.contains(&(i + 1)) {
                                out.case1.push(row.clone());
                            }
                            out.curves.push(row);
                        }
                    }
                    Err(e) => fail(&mut out, stage, e),
                }
            }
        }
    }

    if config.case2.enabled {
        let c = &config.case2;
        for scheme_name in &c.schemes {
            let scheme = match scheme_name.as_str() {
                "naive" => Scheme::Naive,
                "sliding" => Scheme::Sliding {
                    window: c.window,
                    stride: c.stride,
                },
                "block" => Scheme::Block { block: c.block },
                "hv_block" => Scheme::HvBlock {
                    block: c.block,
                    gap: c.gap,
                },
                "one_split" => Scheme::OneSplit { h: c.one_split_h },
                "kfold" => Scheme::KFold { k: c.k },
                "stat_boot" => Scheme::StatBoot {
                    b: c.boot_b,
                    expected_block: c.boot_block,
                },
                other => match cgan_size(other).and_then(|s| models.get(&s)) {
                    Some(model) => Scheme::Cgan {
                        name: scheme_name,
                        model,
                        b: c.cgan_b,
                        h: c.cgan_h,
                    },
                    None => continue,
                },
            };
            for kind in &c.learners {
                let stage = format!("case2:{scheme_name}:{kind}");
                let cell_seed = derive_seed(seed, &stage, 0);
                let grid = c.grids.grid(*kind);
                let result = grid_search(&scheme, &grid, &in_sample, p, cell_seed).and_then(|g| {
                    let rep = finalize_and_test(&g, &in_sample, &holdout, p, cell_seed)?;
                    Ok((g, rep))
                });
                match result {
                    Ok((g, rep)) => {
                        out.case2
                            .push(ReportRow::new(name, scheme_name, kind.name(), g.fold_count(), &rep));
                        out.grids.push(GridRecord {
                            asset: name.to_string(),
                            learner: kind.name().to_string(),
                            result: g,
                        });
                    }
                    Err(e) => fail(&mut out, stage, e),
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Case1SummaryRow {
    pub resampler: String,
    pub strategy: String,
    #[serde(rename = "B")]
    pub b: usize,
    pub assets: usize,
    pub sharpe_median: Option<f64>,
    pub sharpe_mad: Option<f64>,
    pub calmar_median: Option<f64>,
    pub calmar_mad: Option<f64>,
    /// Rank-sum p-value of the Sharpe ratios against the stationary
    /// bootstrap with the same strategy and `B`.
    pub p_vs_stat_boot: Option<f64>,
}

fn values(rows: &[&ReportRow], metric: fn(&ReportRow) -> Option<f64>) -> Vec<f64> {
    rows.iter().filter_map(|r| metric(r)).collect()
}

/// Median and mean absolute deviation per resampler, strategy and `B`.
pub fn case1_summary(rows: &[ReportRow]) -> Vec<Case1SummaryRow> {
    let mut groups: BTreeMap<(String, String, usize), Vec<&ReportRow>> = BTreeMap::new();
    for r in rows {
        groups
            .entry((r.scheme.clone(), r.strategy.clone(), r.b))
            .or_default()
            .push(r);
    }
    let sharpe = |r: &ReportRow| r.sharpe;
    let calmar = |r: &ReportRow| r.calmar;
    groups
        .iter()
        .map(|((rs, strategy, b), members)| {
            let s = robust_summary(&values(members, sharpe)).ok();
            let c = robust_summary(&values(members, calmar)).ok();
            let p = if rs == "stat_boot" {
                None
            } else {
                groups
                    .get(&("stat_boot".to_string(), strategy.clone(), *b))
                    .and_then(|base| wilcoxon_rank_sum(&values(members, sharpe), &values(base, sharpe)).ok())
            };
            Case1SummaryRow {
                resampler: rs.clone(),
                strategy: strategy.clone(),
                b: *b,
                assets: members.len(),
                sharpe_median: s.as_ref().map(|s| s.median),
                sharpe_mad: s.as_ref().map(|s| s.mad),
                calmar_median: c.as_ref().map(|c| c.median),
                calmar_mad: c.as_ref().map(|c| c.mad),
                p_vs_stat_boot: p,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileRow {
    pub scheme: String,
    pub strategy: String,
    pub metric: String,
    pub assets: usize,
    pub q0: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub q100: f64,
}

/// Sharpe and Calmar quantiles across assets per scheme and strategy.
pub fn case2_quantiles(rows: &[ReportRow]) -> Vec<QuantileRow> {
    let mut groups: BTreeMap<(String, String), Vec<&ReportRow>> = BTreeMap::new();
    for r in rows {
        groups
            .entry((r.strategy.clone(), r.scheme.clone()))
            .or_default()
            .push(r);
    }
    let metrics: [(&str, fn(&ReportRow) -> Option<f64>); 2] = [("sharpe", |r| r.sharpe), ("calmar", |r| r.calmar)];
    let mut out = Vec::new();
    for ((strategy, scheme), members) in &groups {
        for (metric, f) in metrics {
            let v = values(members, f);
            if let Ok(s) = robust_summary(&v) {
                let [q0, q25, q50, q75, q100] = s.quantiles;
                out.push(QuantileRow {
                    scheme: scheme.clone(),
                    strategy: strategy.clone(),
                    metric: metric.to_string(),
                    assets: v.len(),
                    q0,
                    q25,
                    q50,
                    q75,
                    q100,
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyRanks {
    pub strategy: String,
    pub table: Option<RankTable>,
    pub error: Option<String>,
}

/// Friedman and Holm rank tables of the Sharpe ratios, one per strategy,
/// with assets as blocks and schemes as methods.
pub fn case2_ranks(rows: &[ReportRow], alpha: f64) -> Vec<StrategyRanks> {
    let mut by_strategy: BTreeMap<&str, Vec<&ReportRow>> = BTreeMap::new();
    for r in rows {
        by_strategy.entry(&r.strategy).or_default().push(r);
    }
    by_strategy
        .into_iter()
        .map(|(strategy, members)| {
            let mut schemes: Vec<String> = Vec::new();
            let mut assets: Vec<String> = Vec::new();
            for r in &members {
                if !schemes.contains(&r.scheme) {
                    schemes.push(r.scheme.clone());
                }
                if !assets.contains(&r.asset) {
                    assets.push(r.asset.clone());
                }
            }
            let mut matrix = vec![vec![f64::NAN; schemes.len()]; assets.len()];
            for r in &members {
                let i = assets.iter().position(|a| a == &r.asset).unwrap();
                let j = schemes.iter().position(|s| s == &r.scheme).unwrap();
                matrix[i][j] = r.sharpe.unwrap_or(f64::NAN);
            }
            match rank_table(&schemes, &matrix, alpha) {
                Ok(t) => StrategyRanks {
                    strategy: strategy.to_string(),
                    table: Some(t),
                    error: None,
                },
                Err(e) => StrategyRanks {
                    strategy: strategy.to_string(),
                    table: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}

/// Recompute the summary tables from report CSVs in `input_dir`.
pub fn aggregate_reports(input_dir: &Path, out_dir: &Path, alpha: f64) -> Result<()> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut found = false;
    let case1 = input_dir.join(CASE1_REPORTS);
    if case1.exists() {
        found = true;
        write_csv(&out_dir.join(CASE1_SUMMARY), &case1_summary(&read_rows(&case1)?))?;
    }
    let case2 = input_dir.join(CASE2_REPORTS);
    if case2.exists() {
        found = true;
        let rows = read_rows(&case2)?;
        write_csv(&out_dir.join(CASE2_QUANTILES), &case2_quantiles(&rows))?;
        write_json(&out_dir.join(CASE2_RANKS), &case2_ranks(&rows, alpha))?;
    }
    if !found {
        return Err(Error::param(format!("no report files in {}", input_dir.display())));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub lag: usize,
    pub real: f64,
    pub sample_mean: f64,
    /// `sample_mean -/+ z / sqrt(T)`.
    pub lower: f64,
    pub upper: f64,
    pub inside: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub acf: Vec<CorrelationRow>,
    pub pacf: Vec<CorrelationRow>,
    /// Share of lags `1..=max_lag` whose real ACF lies in the band.
    pub acf_inside: f64,
    pub pacf_inside: f64,
}

/// Curves, sample paths, cumulative paths and ACF/PACF comparisons as
/// plot-ready CSV files in `out_dir`.
pub fn diagnose(
    model: &CganModel,
    returns: &[f64],
    mode: SampleMode,
    n_paths: usize,
    max_lag: usize,
    seed: u64,
    out_dir: &Path,
) -> Result<Diagnostics> {
    if n_paths == 0 {
        return Err(Error::param("at least one sample path"));
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let p = model.p();
    let paths = model.sample_paths(returns, mode, n_paths, seed)?;
    let real = &returns[p..];

    let mut w = csv_writer(&out_dir.join("rmse_curve.csv"))?;
    w.write_record(["epoch", "rmse", "d_real", "d_fake", "selected"])?;
    for r in &model.curve {
        w.write_record([
            r.epoch.to_string(),
            r.rmse.to_string(),
            opt(r.d_real),
            opt(r.d_fake),
            (r.epoch == model.selected.epoch).to_string(),
        ])?;
    }
    flush(w, &out_dir.join("rmse_curve.csv"))?;

    let header: Vec<String> = ["t".to_string(), "real".to_string()]
        .into_iter()
        .chain((0..n_paths).map(|i| format!("path_{i}")))
        .collect();
    for (file, cumulative) in [("sample_paths.csv", false), ("cum_returns.csv", true)] {
        let path = out_dir.join(file);
        let mut w = csv_writer(&path)?;
        w.write_record(&header)?;
        let mut acc = vec![0.0; n_paths + 1];
        for t in 0..real.len() {
            let mut rec = vec![t.to_string()];
            for (j, v) in std::iter::once(real[t]).chain(paths.iter().map(|x| x[t])).enumerate() {
                acc[j] = if cumulative { acc[j] + v } else { v };
                rec.push(acc[j].to_string());
            }
            w.write_record(&rec)?;
        }
        flush(w, &path)?;
    }

    let (_, half_width) = ci_bounds(real.len(), 0.95)?;
    let compare = |f: fn(&[f64], usize) -> Result<Vec<f64>>| -> Result<Vec<CorrelationRow>> {
        let truth = f(real, max_lag)?;
        let mut mean = vec![0.0; max_lag + 1];
        for path in &paths {
            for (m, v) in mean.iter_mut().zip(f(path, max_lag)?) {
                *m += v / n_paths as f64;
            }
        }
        Ok((1..=max_lag)
            .map(|lag| CorrelationRow {
                lag,
                real: truth[lag],
                sample_mean: mean[lag],
                lower: mean[lag] - half_width,
                upper: mean[lag] + half_width,
                inside: (truth[lag] - mean[lag]).abs() <= half_width,
            })
            .collect())
    };
    let acf_rows = compare(acf)?;
    let pacf_rows = compare(pacf)?;
    write_csv(&out_dir.join("acf.csv"), &acf_rows)?;
    write_csv(&out_dir.join("pacf.csv"), &pacf_rows)?;
    let share = |rows: &[CorrelationRow]| rows.iter().filter(|r| r.inside).count() as f64 / rows.len() as f64;
    Ok(Diagnostics {
        acf_inside: share(&acf_rows),
        pacf_inside: share(&pacf_rows),
        acf: acf_rows,
        pacf: pacf_rows,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn flush(mut w: csv::Writer<fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv_writer(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    flush(w, path)
}

/// Report rows, with the header written even when there are none.
pub fn write_rows(path: &Path, rows: &[ReportRow]) -> Result<()> {
    if rows.is_empty() {
        let mut w = csv_writer(path)?;
        w.write_record([
            "asset",
            "scheme",
            "strategy",
            "B",
            "sharpe",
            "calmar",
            "mdd",
            "rmse",
            "config_hash",
        ])?;
        return flush(w, path);
    }
    write_csv(path, rows)
}

pub fn read_rows(path: &Path) -> Result<Vec<ReportRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
