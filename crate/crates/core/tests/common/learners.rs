//! Textbook reference fits for the learners.

use ndarray::Array2;

use super::solve_dense;

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Ridge through the normal equations on z-scored columns (population
/// std), centred target and an unpenalised intercept. Returns a predictor.
pub fn ridge_oracle(x: &Array2<f64>, y: &[f64], alpha: f64) -> impl Fn(&[f64]) -> f64 {
    let (n, d) = x.dim();
    let mut means = vec![0.0; d];
    let mut stds = vec![0.0; d];
    for j in 0..d {
        let col: Vec<f64> = x.column(j).to_vec();
        means[j] = mean(&col);
        stds[j] = (col.iter().map(|v| (v - means[j]).powi(2)).sum::<f64>() / n as f64).sqrt();
    }
    let z = |i: usize, j: usize| (x[[i, j]] - means[j]) / stds[j];
    let ybar = mean(y);
    let mut a = vec![vec![0.0; d]; d];
    let mut b = vec![0.0; d];
    for r in 0..d {
        for c in 0..d {
            a[r][c] = (0..n).map(|i| z(i, r) * z(i, c)).sum::<f64>() + if r == c { alpha } else { 0.0 };
        }
        b[r] = (0..n).map(|i| z(i, r) * (y[i] - ybar)).sum();
    }
    let beta = solve_dense(a, b);
    move |row: &[f64]| ybar + (0..d).map(|j| beta[j] * (row[j] - means[j]) / stds[j]).sum::<f64>()
}

/// Best single split by exhaustive search over every feature and every
/// midpoint between distinct sorted values. Returns a predictor, or the
/// mean when no split exists.
pub fn stump_oracle(x: &Array2<f64>, y: &[f64]) -> impl Fn(&[f64]) -> f64 {
    let (n, d) = x.dim();
    let sse = |idx: &[usize]| {
        let m = idx.iter().map(|&i| y[i]).sum::<f64>() / idx.len() as f64;
        (idx.iter().map(|&i| (y[i] - m).powi(2)).sum::<f64>(), m)
    };
    let all: Vec<usize> = (0..n).collect();
    let (mut best, root_mean) = sse(&all);
    let mut rule: Option<(usize, f64, f64, f64)> = None;
    for j in 0..d {
        let mut vals: Vec<f64> = x.column(j).to_vec();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        for w in vals.windows(2) {
            let t = 0.5 * (w[0] + w[1]);
            let left: Vec<usize> = all.iter().copied().filter(|&i| x[[i, j]] <= t).collect();
            let right: Vec<usize> = all.iter().copied().filter(|&i| x[[i, j]] > t).collect();
            let (sl, ml) = sse(&left);
            let (sr, mr) = sse(&right);
            if sl + sr < best - 1e-12 {
                best = sl + sr;
                rule = Some((j, t, ml, mr));
            }
        }
    }
    move |row: &[f64]| match rule {
        Some((j, t, ml, mr)) => {
            if row[j] <= t {
                ml
            } else {
                mr
            }
        }
        None => root_mean,
    }
}
