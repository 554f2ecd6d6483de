//! Identity-signal backtests and the performance metrics built on them.
//!
//! Cumulative paths are running sums of log returns (no compounding).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::timeseries::{mean_std, TRADING_DAYS};

/// `r_t * rhat_t`.
pub fn strategy_returns(actual: &[f64], predicted: &[f64]) -> Result<Vec<f64>> {
    if actual.len() != predicted.len() {
        return Err(Error::shape(format!(
            "{} returns vs {} predictions",
            actual.len(),
            predicted.len()
        )));
    }
    Ok(actual.iter().zip(predicted).map(|(r, p)| r * p).collect())
}

pub fn cumulative(returns: &[f64]) -> Vec<f64> {
    returns
        .iter()
        .scan(0.0, |acc, r| {
            *acc += r;
            Some(*acc)
        })
        .collect()
}

pub fn annualized_mean(returns: &[f64]) -> f64 {
    returns.iter().sum::<f64>() / returns.len() as f64 * TRADING_DAYS
}

/// Annualised mean over annualised (population) volatility.
pub fn sharpe(returns: &[f64]) -> Result<f64> {
    if returns.len() < 2 {
        return Err(Error::InsufficientHistory {
            needed: 2,
            got: returns.len(),
        });
    }
    let first = returns[0];
    if returns.iter().all(|&r| r == first) {
        return Err(Error::ZeroVolatility);
    }
    let (mean, std) = mean_std(returns);
    if !(std > 0.0) {
        return Err(Error::ZeroVolatility);
    }
    Ok(mean * TRADING_DAYS / (std * TRADING_DAYS.sqrt()))
}

/// Most negative gap between the cumulative path and its running peak. The
/// peak starts at zero, so an initial loss counts as a drawdown.
pub fn max_drawdown(returns: &[f64]) -> Result<f64> {
    if returns.is_empty() {
        return Err(Error::InsufficientHistory { needed: 1, got: 0 });
    }
    let mut cum = 0.0;
    let mut peak = 0.0_f64;
    let mut mdd = 0.0_f64;
    for r in returns {
        cum += r;
        peak = peak.max(cum);
        mdd = mdd.min(cum - peak);
    }
    Ok(mdd)
}

pub fn calmar(returns: &[f64]) -> Result<f64> {
    let mdd = max_drawdown(returns)?;
    if mdd == 0.0 {
        return Err(Error::ZeroDrawdown);
    }
    Ok(annualized_mean(returns) / -mdd)
}

pub fn rmse(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    if actual.len() != predicted.len() || actual.is_empty() {
        return Err(Error::shape(format!(
            "{} values vs {} predictions",
            actual.len(),
            predicted.len()
        )));
    }
    let sse: f64 = actual.iter().zip(predicted).map(|(a, p)| (a - p).powi(2)).sum();
    Ok((sse / actual.len() as f64).sqrt())
}

/// Rescale so the annualised volatility equals `target_vol`.
pub fn vol_scale(returns: &[f64], target_vol: f64) -> Result<Vec<f64>> {
    if returns.len() < 2 {
        return Err(Error::InsufficientHistory {
            needed: 2,
            got: returns.len(),
        });
    }
    let (_, std) = mean_std(returns);
    if !(std > 0.0) {
        return Err(Error::ZeroVolatility);
    }
    let factor = target_vol / (std * TRADING_DAYS.sqrt());
    Ok(returns.iter().map(|r| r * factor).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestReport {
    /// `None` when the strategy returns have no spread.
    pub sharpe: Option<f64>,
    /// `None` when the path never draws down.
    pub calmar: Option<f64>,
    pub mdd: f64,
    pub rmse: f64,
    pub strat_returns: Vec<f64>,
    pub cum_returns: Vec<f64>,
}

impl BacktestReport {
    pub fn new(actual: &[f64], predicted: &[f64]) -> Result<Self> {
        let strat_returns = strategy_returns(actual, predicted)?;
        let rmse = rmse(actual, predicted)?;
        let mdd = max_drawdown(&strat_returns)?;
        Ok(Self {
            sharpe: sharpe(&strat_returns).ok(),
            calmar: calmar(&strat_returns).ok(),
            mdd,
            rmse,
            cum_returns: cumulative(&strat_returns),
            strat_returns,
        })
    }
}

/// One line of a results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub asset: String,
    pub scheme: String,
    pub strategy: String,
    #[serde(rename = "B")]
    pub b: usize,
    pub sharpe: Option<f64>,
    pub calmar: Option<f64>,
    pub mdd: f64,
    pub rmse: f64,
    #[serde(default)]
    pub config_hash: String,
}

impl ReportRow {
    pub fn new(asset: &str, scheme: &str, strategy: &str, b: usize, report: &BacktestReport) -> Self {
        Self {
            asset: asset.to_string(),
            scheme: scheme.to_string(),
            strategy: strategy.to_string(),
            b,
            sharpe: report.sharpe,
            calmar: report.calmar,
            mdd: report.mdd,
            rmse: report.rmse,
            config_hash: String::new(),
        }
    }
}
