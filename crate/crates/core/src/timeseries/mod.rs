//! Price ingestion, excess log returns, z-score scaling and lagged
//! supervised matrices.

mod acf;
pub mod io;

pub use acf::{acf, ci_bounds, pacf};

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use ndarray::{Array2, ArrayView1, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Trading days per year. Used for the benchmark day count and for every
/// annualisation in the crate.
pub const TRADING_DAYS: f64 = 252.0;

/// Daily close prices with an optional annualised benchmark short rate.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    dates: Vec<NaiveDate>,
    prices: Vec<f64>,
    benchmark_rate: Option<Vec<f64>>,
}

impl PriceSeries {
    pub fn new(dates: Vec<NaiveDate>, prices: Vec<f64>, benchmark_rate: Option<Vec<f64>>) -> Result<Self> {
        if dates.len() != prices.len() {
            return Err(Error::shape(format!(
                "{} dates for {} prices",
                dates.len(),
                prices.len()
            )));
        }
        check_increasing(&dates)?;
        for (date, &price) in dates.iter().zip(&prices) {
            if !(price > 0.0) || !price.is_finite() {
                return Err(Error::NonPositivePrice {
                    date: date.to_string(),
                    price,
                });
            }
        }
        if let Some(rate) = &benchmark_rate {
            if rate.len() != prices.len() {
                return Err(Error::MisalignedBenchmark {
                    expected: prices.len(),
                    got: rate.len(),
                });
            }
            if let Some(index) = rate.iter().position(|r| !r.is_finite()) {
                return Err(Error::NonFinite { index });
            }
        }
        Ok(Self {
            dates,
            prices,
            benchmark_rate,
        })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn benchmark_rate(&self) -> Option<&[f64]> {
        self.benchmark_rate.as_deref()
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }
}

/// Daily excess log returns, dated by the close that ends each period.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    dates: Vec<NaiveDate>,
    returns: Vec<f64>,
}

impl ReturnSeries {
    pub fn new(dates: Vec<NaiveDate>, returns: Vec<f64>) -> Result<Self> {
        if dates.len() != returns.len() {
            return Err(Error::shape(format!(
                "{} dates for {} returns",
                dates.len(),
                returns.len()
            )));
        }
        check_increasing(&dates)?;
        if let Some(index) = returns.iter().position(|r| !r.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { dates, returns })
    }

    /// Wrap raw values, stamping them with consecutive weekdays from
    /// 2000-01-03. Convenient for synthetic series.
    pub fn from_values(returns: Vec<f64>) -> Result<Self> {
        let dates = weekdays_from(NaiveDate::from_ymd_opt(2000, 1, 3).unwrap(), returns.len());
        Self::new(dates, returns)
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn values(&self) -> &[f64] {
        &self.returns
    }

    pub fn len(&self) -> usize {
        self.returns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.returns.is_empty()
    }

    /// The first `len` observations.
    pub fn head(&self, len: usize) -> ReturnSeries {
        let len = len.min(self.len());
        ReturnSeries {
            dates: self.dates[..len].to_vec(),
            returns: self.returns[..len].to_vec(),
        }
    }

    /// Split into `(in_sample, holdout)` with the final `holdout` points
    /// reserved.
    pub fn split_holdout(&self, holdout: usize) -> Result<(ReturnSeries, ReturnSeries)> {
        if holdout == 0 || holdout >= self.len() {
            return Err(Error::param(format!(
                "holdout {holdout} must lie in [1, {})",
                self.len()
            )));
        }
        let cut = self.len() - holdout;
        let tail = ReturnSeries {
            dates: self.dates[cut..].to_vec(),
            returns: self.returns[cut..].to_vec(),
        };
        Ok((self.head(cut), tail))
    }
}

fn check_increasing(dates: &[NaiveDate]) -> Result<()> {
    for pair in dates.windows(2) {
        if pair[1] <= pair[0] {
            return Err(Error::UnorderedDates {
                prev: pair[0].to_string(),
                next: pair[1].to_string(),
            });
        }
    }
    Ok(())
}

pub(crate) fn weekdays_from(start: NaiveDate, count: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(count);
    let mut day = start;
    while out.len() < count {
        if !matches!(day.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(day);
        }
        day += Duration::days(1);
    }
    out
}

/// `ln(p[t+1] / p[t]) - rate[t] / 252`, or plain log returns when the series
/// carries no benchmark.
pub fn compute_excess_log_returns(prices: &PriceSeries) -> Result<ReturnSeries> {
    if prices.len() < 2 {
        return Err(Error::InsufficientHistory {
            needed: 1,
            got: prices.len(),
        });
    }
    let p = prices.prices();
    let returns = (0..p.len() - 1)
        .map(|t| {
            let log_ret = (p[t + 1] / p[t]).ln();
            match prices.benchmark_rate() {
                Some(rate) => log_ret - rate[t] / TRADING_DAYS,
                None => log_ret,
            }
        })
        .collect();
    ReturnSeries::new(prices.dates()[1..].to_vec(), returns)
}

/// Z-score parameters. The standard deviation is the population (1/N) one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub mean: f64,
    pub std: f64,
}

impl ScalerParams {
    pub const IDENTITY: ScalerParams = ScalerParams { mean: 0.0, std: 1.0 };

    pub fn fit(values: &[f64]) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::DegenerateScale("need at least two values"));
        }
        let (mean, std) = mean_std(values);
        if !(std > 0.0) {
            return Err(Error::DegenerateScale("zero variance"));
        }
        Ok(Self { mean, std })
    }

    /// Like [`ScalerParams::fit`] but falls back to centring only when the
    /// values have no spread.
    pub fn fit_or_center(values: &[f64]) -> Self {
        Self::fit(values).unwrap_or_else(|_| ScalerParams {
            mean: values.iter().sum::<f64>() / values.len().max(1) as f64,
            std: 1.0,
        })
    }

    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        (x - self.mean) / self.std
    }

    #[inline]
    pub fn invert(&self, z: f64) -> f64 {
        z * self.std + self.mean
    }

    pub fn apply_all(&self, values: &[f64]) -> Vec<f64> {
        values.iter().map(|&x| self.apply(x)).collect()
    }

    pub fn invert_all(&self, values: &[f64]) -> Vec<f64> {
        values.iter().map(|&z| self.invert(z)).collect()
    }
}

/// Shorthand for [`ScalerParams::fit`].
pub fn fit_zscore(values: &[f64]) -> Result<ScalerParams> {
    ScalerParams::fit(values)
}

/// Population mean and standard deviation (two-pass).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Supervised view of a series: row `i` predicts `returns[p + i]` from
/// `returns[p + i - 1], ..., returns[i]` (most recent lag first).
#[derive(Debug, Clone, PartialEq)]
pub struct LaggedDataset {
    pub features: Array2<f64>,
    pub targets: Vec<f64>,
    pub p: usize,
}

impl LaggedDataset {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// Position in the source series of the target of row `row`.
    pub fn target_index(&self, row: usize) -> usize {
        self.p + row
    }

    pub fn row(&self, row: usize) -> ArrayView1<'_, f64> {
        self.features.row(row)
    }

    /// Gather rows (duplicates allowed) into a new dataset.
    pub fn select(&self, rows: &[usize]) -> LaggedDataset {
        LaggedDataset {
            features: self.features.select(Axis(0), rows),
            targets: rows.iter().map(|&r| self.targets[r]).collect(),
            p: self.p,
        }
    }
}

pub fn build_lagged(returns: &[f64], p: usize) -> Result<LaggedDataset> {
    if p == 0 {
        return Err(Error::param("lag count p must be at least 1"));
    }
    let n = returns.len();
    if p >= n {
        return Err(Error::InsufficientHistory { needed: p, got: n });
    }
    let rows = n - p;
    let features = Array2::from_shape_fn((rows, p), |(i, j)| returns[p + i - 1 - j]);
    Ok(LaggedDataset {
        features,
        targets: returns[p..].to_vec(),
        p,
    })
}

/// Rows whose targets are the `holdout` points, with lags reaching back
/// into `in_sample`.
pub fn lagged_holdout(in_sample: &[f64], holdout: &[f64], p: usize) -> Result<LaggedDataset> {
    if in_sample.len() < p {
        return Err(Error::InsufficientHistory {
            needed: p,
            got: in_sample.len(),
        });
    }
    if holdout.is_empty() {
        return Err(Error::param("empty holdout"));
    }
    let tail = &in_sample[in_sample.len() - p..];
    let joined: Vec<f64> = tail.iter().chain(holdout).copied().collect();
    build_lagged(&joined, p)
}
