use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Sample autocorrelations at lags `0..=max_lag` using the biased (1/T)
/// autocovariance. `acf[0]` is 1.
pub fn acf(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = series.len();
    if n <= max_lag + 1 {
        return Err(Error::InsufficientHistory {
            needed: max_lag + 1,
            got: n,
        });
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = series.iter().map(|x| x - mean).collect();
    let gamma0 = centered.iter().map(|x| x * x).sum::<f64>();
    if !(gamma0 > 0.0) {
        return Err(Error::ConstantSeries);
    }
    Ok((0..=max_lag)
        .map(|k| {
            let gk: f64 = centered[k..].iter().zip(&centered[..n - k]).map(|(a, b)| a * b).sum();
            gk / gamma0
        })
        .collect())
}

/// Partial autocorrelations at lags `0..=max_lag` by Durbin-Levinson.
/// `pacf[0]` is 1.
pub fn pacf(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let rho = acf(series, max_lag)?;
    let mut out = Vec::with_capacity(max_lag + 1);
    out.push(1.0);
    // phi[j-1] holds phi_{k,j} for the current order k
    let mut phi: Vec<f64> = Vec::with_capacity(max_lag);
    for k in 1..=max_lag {
        let num = rho[k] - (1..k).map(|j| phi[j - 1] * rho[k - j]).sum::<f64>();
        let den = 1.0 - (1..k).map(|j| phi[j - 1] * rho[j]).sum::<f64>();
        let phi_kk = if den.abs() < f64::EPSILON { 0.0 } else { num / den };
        let prev = phi.clone();
        for j in 1..k {
            phi[j - 1] = prev[j - 1] - phi_kk * prev[k - j - 1];
        }
        phi.push(phi_kk);
        out.push(phi_kk);
    }
    Ok(out)
}

/// Two-sided white-noise confidence band `±z_{(1+level)/2} / sqrt(T)`.
pub fn ci_bounds(len: usize, level: f64) -> Result<(f64, f64)> {
    if !(level > 0.0 && level < 1.0) || len == 0 {
        return Err(Error::param(format!("ci level {level} for length {len}")));
    }
    let z = Normal::standard().inverse_cdf(0.5 + level / 2.0);
    let half = z / (len as f64).sqrt();
    Ok((-half, half))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic;

    /// Least-squares fit of x_t on its k lags; returns the last coefficient.
    fn pacf_by_regression(x: &[f64], k: usize) -> f64 {
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        let c: Vec<f64> = x.iter().map(|v| v - mean).collect();
        let mut a = vec![vec![0.0; k + 1]; k];
        for t in k..c.len() {
            for i in 0..k {
                for j in 0..k {
                    a[i][j] += c[t - 1 - i] * c[t - 1 - j];
                }
                a[i][k] += c[t - 1 - i] * c[t];
            }
        }
        // Gauss-Jordan
        for col in 0..k {
            let piv = (col..k)
                .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
                .unwrap();
            a.swap(col, piv);
            for row in 0..k {
                if row != col {
                    let f = a[row][col] / a[col][col];
                    for m in col..=k {
                        a[row][m] -= f * a[col][m];
                    }
                }
            }
        }
        a[k - 1][k] / a[k - 1][k - 1]
    }

    #[test]
    fn white_noise_stays_in_band() {
        let n = 10_000;
        let bound = 3.0 / (n as f64).sqrt();
        let mut inside = 0;
        let mut total = 0;
        for rep in 0..10 {
            let x = synthetic::white_noise(n, 1.0, 100 + rep);
            let r = acf(&x, 63).unwrap();
            assert_eq!(r[0], 1.0);
            inside += r[1..].iter().filter(|v| v.abs() < bound).count();
            total += 63;
        }
        assert!(inside as f64 / total as f64 >= 0.99, "{inside}/{total}");
    }

    #[test]
    fn ar1_acf_and_pacf() {
        let x = synthetic::ar1(0.8, 1.0, 10_000, 11);
        let r = acf(&x, 5).unwrap();
        assert!((0.77..=0.83).contains(&r[1]), "acf[1] = {}", r[1]);
        let p = pacf(&x, 5).unwrap();
        assert!((p[1] - r[1]).abs() < 1e-12);
        assert!(p[2].abs() < 0.03, "pacf[2] = {}", p[2]);
    }

    #[test]
    fn ar2_pacf_vanishes_beyond_order() {
        let x = synthetic::ar(&[0.5, 0.3], 1.0, 20_000, 5);
        let p = pacf(&x, 8).unwrap();
        assert!((p[2] - 0.3).abs() < 0.05, "pacf[2] = {}", p[2]);
        for lag in 3..=8 {
            assert!(p[lag].abs() < 0.03, "pacf[{lag}] = {}", p[lag]);
        }
    }

    #[test]
    fn durbin_levinson_matches_regression_oracle() {
        let x = synthetic::ar(&[0.4, -0.2, 0.1], 1.0, 5_000, 21);
        let p = pacf(&x, 4).unwrap();
        for k in 1..=4 {
            let oracle = pacf_by_regression(&x, k);
            // Yule-Walker and OLS differ by O(k/T) edge terms
            assert!((p[k] - oracle).abs() < 5e-3, "lag {k}: {} vs {oracle}", p[k]);
        }
    }

    #[test]
    fn constant_series_is_rejected() {
        assert!(matches!(acf(&[2.0; 20], 3), Err(Error::ConstantSeries)));
        assert!(acf(&[1.0, 2.0, 3.0], 2).is_err());
    }

    #[test]
    fn ci_band_at_95() {
        let (lo, hi) = ci_bounds(2_500, 0.95).unwrap();
        assert!((hi - 1.959_963_984_540_054 / 50.0).abs() < 1e-12);
        assert_eq!(lo, -hi);
    }
}
