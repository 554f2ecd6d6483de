//! Cross-asset summaries and nonparametric tests.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Samples of at most this size (both sides) get an exact rank-sum test.
pub const EXACT_RANK_SUM_MAX: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustSummary {
    pub median: f64,
    /// Mean absolute deviation about the median.
    pub mad: f64,
    /// Quantiles at 0, 25, 50, 75 and 100 percent.
    pub quantiles: [f64; 5],
}

/// Linear interpolation between order statistics at position `q (n - 1)`.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn robust_summary(values: &[f64]) -> Result<RobustSummary> {
    if values.is_empty() {
        return Err(Error::param("summary of no values"));
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index: i });
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = quantile(&sorted, 0.5);
    let mad = sorted.iter().map(|v| (v - median).abs()).sum::<f64>() / sorted.len() as f64;
    let quantiles = [0.0, 0.25, 0.5, 0.75, 1.0].map(|q| quantile(&sorted, q));
    Ok(RobustSummary { median, mad, quantiles })
}

/// Average ranks (1-based) with ties sharing the mean of their positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Two-sided Wilcoxon rank-sum p-value. Exact over all rank assignments
/// when both samples are small, otherwise the normal approximation with tie
/// correction.
pub fn wilcoxon_rank_sum(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::param("rank-sum test needs at least two values per sample"));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index: 0 });
    }
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = average_ranks(&pooled);
    if a.len() <= EXACT_RANK_SUM_MAX && b.len() <= EXACT_RANK_SUM_MAX {
        Ok(exact_rank_sum(&ranks, a.len()))
    } else {
        Ok(normal_rank_sum(&ranks, a.len()))
    }
}

/// Distribution of the sum of `n` of the (doubled, hence integral) ranks,
/// counted by dynamic programming over subsets.
fn exact_rank_sum(ranks: &[f64], n: usize) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let observed: usize = doubled[..n].iter().sum();
    let max_sum: usize = doubled.iter().sum();
    // counts[k][s]: subsets of size k with doubled-rank sum s
    let mut counts = vec![vec![0.0_f64; max_sum + 1]; n + 1];
    counts[0][0] = 1.0;
    for &r in &doubled {
        for k in (1..=n).rev() {
            let (lower, upper) = counts.split_at_mut(k);
            for s in (r..=max_sum).rev() {
                upper[0][s] += lower[k - 1][s - r];
            }
        }
    }
    let dist = &counts[n];
    let total: f64 = dist.iter().sum();
    let below: f64 = dist[..=observed].iter().sum();
    let above: f64 = dist[observed..].iter().sum();
    (2.0 * below.min(above) / total).min(1.0)
}

fn normal_rank_sum(ranks: &[f64], n: usize) -> f64 {
    let big_n = ranks.len() as f64;
    let (nf, mf) = (n as f64, big_n - n as f64);
    let w: f64 = ranks[..n].iter().sum();
    let u = w - nf * (nf + 1.0) / 2.0;
    let mut sorted = ranks.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    let var = nf * mf / 12.0 * ((big_n + 1.0) - tie_term / (big_n * (big_n - 1.0)));
    if !(var > 0.0) {
        return 1.0;
    }
    let z = (u - nf * mf / 2.0) / var.sqrt();
    let normal = Normal::standard();
    (2.0 * normal.cdf(-z.abs())).min(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FriedmanResult {
    /// Complete rows used.
    pub rows: usize,
    pub rank_sums: Vec<f64>,
    pub avg_ranks: Vec<f64>,
    pub chi2: f64,
    pub p_value: f64,
}

/// Friedman test over rows (blocks) and columns (methods). Within each row
/// the largest value gets rank 1. Rows with a non-finite cell are dropped.
pub fn friedman_test(matrix: &[Vec<f64>]) -> Result<FriedmanResult> {
    let k = matrix.first().map_or(0, Vec::len);
    if k < 2 {
        return Err(Error::param("Friedman test needs at least two methods"));
    }
    if matrix.iter().any(|r| r.len() != k) {
        return Err(Error::shape("ragged results matrix"));
    }
    let complete: Vec<&Vec<f64>> = matrix.iter().filter(|r| r.iter().all(|v| v.is_finite())).collect();
    let n = complete.len();
    if n < 2 {
        return Err(Error::param("Friedman test needs at least two complete rows"));
    }
    let mut rank_sums = vec![0.0; k];
    for row in &complete {
        let negated: Vec<f64> = row.iter().map(|v| -v).collect();
        for (s, r) in rank_sums.iter_mut().zip(average_ranks(&negated)) {
            *s += r;
        }
    }
    let (nf, kf) = (n as f64, k as f64);
    let avg_ranks: Vec<f64> = rank_sums.iter().map(|s| s / nf).collect();
    let centre = (kf + 1.0) / 2.0;
    let chi2 = 12.0 * nf / (kf * (kf + 1.0)) * avg_ranks.iter().map(|r| (r - centre).powi(2)).sum::<f64>();
    let dist = ChiSquared::new(kf - 1.0).map_err(|e| Error::param(e.to_string()))?;
    Ok(FriedmanResult {
        rows: n,
        rank_sums,
        avg_ranks,
        chi2,
        p_value: 1.0 - dist.cdf(chi2),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolmStep {
    /// Position in the input.
    pub index: usize,
    pub p_value: f64,
    pub threshold: f64,
    pub reject: bool,
}

/// `alpha / (m - i + 1)` for the `i`-th smallest of `m` p-values.
pub fn holm_thresholds(m: usize, alpha: f64) -> Vec<f64> {
    (1..=m).map(|i| alpha / (m - i + 1) as f64).collect()
}

/// Step-down Holm procedure, returned in ascending p-value order.
pub fn holm_correction(p_values: &[f64], alpha: f64) -> Result<Vec<HolmStep>> {
    if p_values.is_empty() {
        return Err(Error::param("no p-values"));
    }
    if p_values.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::param("p-values must lie in [0, 1]"));
    }
    let mut order: Vec<usize> = (0..p_values.len()).collect();
    order.sort_by(|&a, &b| p_values[a].total_cmp(&p_values[b]).then(a.cmp(&b)));
    let thresholds = holm_thresholds(p_values.len(), alpha);
    let mut still = true;
    Ok(order
        .into_iter()
        .zip(thresholds)
        .map(|(index, threshold)| {
            still = still && p_values[index] <= threshold;
            HolmStep {
                index,
                p_value: p_values[index],
                threshold,
                reject: still,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankRow {
    pub method: String,
    pub avg_rank: f64,
    /// Rank-sum p-value against the best-ranked method; `None` for the best.
    pub p_value: Option<f64>,
    pub holm_threshold: Option<f64>,
    pub reject: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankTable {
    pub friedman_chi2: f64,
    pub friedman_p: f64,
    pub rows_used: usize,
    /// Sorted by average rank, best first.
    pub methods: Vec<RankRow>,
}

/// Average ranks, the Friedman test, and Holm-corrected rank-sum tests of
/// every method against the best-ranked one.
pub fn rank_table(methods: &[String], matrix: &[Vec<f64>], alpha: f64) -> Result<RankTable> {
    let fr = friedman_test(matrix)?;
    if methods.len() != fr.avg_ranks.len() {
        return Err(Error::shape("one name per method column"));
    }
    let complete: Vec<&Vec<f64>> = matrix.iter().filter(|r| r.iter().all(|v| v.is_finite())).collect();
    let column = |j: usize| -> Vec<f64> { complete.iter().map(|r| r[j]).collect() };
    let mut order: Vec<usize> = (0..methods.len()).collect();
    order.sort_by(|&a, &b| fr.avg_ranks[a].total_cmp(&fr.avg_ranks[b]).then(a.cmp(&b)));
    let best = order[0];
    let others = &order[1..];
    let p_values = others
        .iter()
        .map(|&j| wilcoxon_rank_sum(&column(best), &column(j)))
        .collect::<Result<Vec<f64>>>()?;
    let holm = holm_correction(&p_values, alpha)?;
    let mut rows = vec![RankRow {
        method: methods[best].clone(),
        avg_rank: fr.avg_ranks[best],
        p_value: None,
        holm_threshold: None,
        reject: None,
    }];
    for step in holm {
        let j = others[step.index];
        rows.push(RankRow {
            method: methods[j].clone(),
            avg_rank: fr.avg_ranks[j],
            p_value: Some(step.p_value),
            holm_threshold: Some(step.threshold),
            reject: Some(step.reject),
        });
    }
    Ok(RankTable {
        friedman_chi2: fr.chi2,
        friedman_p: fr.p_value,
        rows_used: fr.rows,
        methods: rows,
    })
}
