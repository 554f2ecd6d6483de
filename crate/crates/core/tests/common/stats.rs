//! Enumeration oracles for the rank tests.

/// Midranks, 1-based, lowest value first.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .map(|&v| {
            let below = values.iter().filter(|&&w| w < v).count() as f64;
            let equal = values.iter().filter(|&&w| w == v).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

/// Two-sided exact rank-sum p-value by listing every way to pick which
/// pooled positions belong to the first sample.
pub fn rank_sum_by_enumeration(a: &[f64], b: &[f64]) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = midranks(&pooled);
    let n = a.len();
    let observed: f64 = ranks[..n].iter().sum();
    let (mut total, mut low, mut high) = (0u64, 0u64, 0u64);
    for mask in 0u32..(1 << pooled.len()) {
        if mask.count_ones() as usize != n {
            continue;
        }
        let w: f64 = (0..pooled.len()).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        total += 1;
        if w <= observed + 1e-9 {
            low += 1;
        }
        if w >= observed - 1e-9 {
            high += 1;
        }
    }
    (2.0 * low.min(high) as f64 / total as f64).min(1.0)
}

/// Per-column sums of within-row ranks, largest value ranked 1.
pub fn friedman_rank_sums(matrix: &[Vec<f64>]) -> Vec<f64> {
    let k = matrix[0].len();
    let mut sums = vec![0.0; k];
    for row in matrix {
        let negated: Vec<f64> = row.iter().map(|v| -v).collect();
        for (s, r) in sums.iter_mut().zip(midranks(&negated)) {
            *s += r;
        }
    }
    sums
}

/// Textbook statistic `12/(n k (k+1)) sum R_j^2 - 3 n (k+1)`.
pub fn friedman_chi2(rank_sums: &[f64], n: usize) -> f64 {
    let k = rank_sums.len() as f64;
    let n = n as f64;
    12.0 / (n * k * (k + 1.0)) * rank_sums.iter().map(|r| r * r).sum::<f64>() - 3.0 * n * (k + 1.0)
}

/// One-sided sign test: probability of at least `wins` successes out of
/// `n` fair coin flips.
pub fn sign_test_p(wins: usize, n: usize) -> f64 {
    let choose = |n: usize, k: usize| (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64);
    (wins..=n).map(|k| choose(n, k)).sum::<f64>() / 2f64.powi(n as i32)
}
