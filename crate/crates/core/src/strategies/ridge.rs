use ndarray::linalg::general_mat_mul;
use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::timeseries::{mean_std, ScalerParams};

/// Ridge regression on z-scored features with an unpenalised intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeModel {
    pub shrinkage: f64,
    /// Coefficients on the z-scored features.
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub feature_scalers: Vec<ScalerParams>,
}

impl RidgeModel {
    /// Solves `(Z'Z + shrinkage I) b = Z'(y - mean(y))`. Constant columns are
    /// centred only, which zeroes them.
    pub fn fit(x: ArrayView2<f64>, y: &[f64], shrinkage: f64) -> Result<Self> {
        if !(shrinkage > 0.0) {
            return Err(Error::param("ridge shrinkage must be positive"));
        }
        let (n, d) = x.dim();
        if n != y.len() || n == 0 {
            return Err(Error::shape(format!("x {:?} vs y {}", x.dim(), y.len())));
        }
        let feature_scalers: Vec<ScalerParams> = x
            .columns()
            .into_iter()
            .map(|c| ScalerParams::fit_or_center(&c.to_vec()))
            .collect();
        let mut z = x.to_owned();
        for (mut col, s) in z.columns_mut().into_iter().zip(&feature_scalers) {
            col.mapv_inplace(|v| s.apply(v));
        }
        let (y_mean, _) = mean_std(y);
        let yc = Array1::from_iter(y.iter().map(|v| v - y_mean));

        let mut gram = Array2::<f64>::zeros((d, d));
        general_mat_mul(1.0, &z.t(), &z, 0.0, &mut gram);
        for i in 0..d {
            gram[[i, i]] += shrinkage;
        }
        let rhs = z.t().dot(&yc);
        let coefficients = cholesky_solve(gram, rhs.to_vec())?;
        Ok(Self {
            shrinkage,
            coefficients,
            intercept: y_mean,
            feature_scalers,
        })
    }

    pub fn predict_row(&self, x: ArrayView1<f64>) -> f64 {
        self.intercept
            + x.iter()
                .zip(&self.feature_scalers)
                .zip(&self.coefficients)
                .map(|((&v, s), &b)| s.apply(v) * b)
                .sum::<f64>()
    }
}

/// Solve `a x = b` for symmetric positive definite `a`.
fn cholesky_solve(mut a: Array2<f64>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let d = b.len();
    // lower factor in place
    for j in 0..d {
        let mut diag = a[[j, j]];
        for k in 0..j {
            diag -= a[[j, k]] * a[[j, k]];
        }
        if !(diag > 0.0) {
            return Err(Error::Singular("ridge normal equations"));
        }
        let diag = diag.sqrt();
        a[[j, j]] = diag;
        for i in j + 1..d {
            let mut v = a[[i, j]];
            for k in 0..j {
                v -= a[[i, k]] * a[[j, k]];
            }
            a[[i, j]] = v / diag;
        }
    }
    for i in 0..d {
        let mut v = b[i];
        for k in 0..i {
            v -= a[[i, k]] * b[k];
        }
        b[i] = v / a[[i, i]];
    }
    for i in (0..d).rev() {
        let mut v = b[i];
        for k in i + 1..d {
            v -= a[[k, i]] * b[k];
        }
        b[i] = v / a[[i, i]];
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn cholesky_solves_small_system() {
        let a = array![[4.0, 2.0, 0.4], [2.0, 5.0, 1.0], [0.4, 1.0, 3.0]];
        let x = cholesky_solve(a.clone(), vec![1.0, -2.0, 0.5]).unwrap();
        let back = a.dot(&Array1::from(x));
        for (u, v) in back.iter().zip([1.0, -2.0, 0.5]) {
            assert!((u - v).abs() < 1e-12);
        }
        assert!(cholesky_solve(array![[1.0, 2.0], [2.0, 1.0]], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn huge_shrinkage_predicts_the_mean() {
        let x = array![[1.0, 0.0], [2.0, 1.0], [3.0, 0.0], [4.0, 1.0]];
        let y = [1.0, 3.0, 2.0, 6.0];
        let m = RidgeModel::fit(x.view(), &y, 1e12).unwrap();
        assert!(m.coefficients.iter().all(|b| b.abs() < 1e-10));
        assert!((m.predict_row(array![10.0, 5.0].view()) - 3.0).abs() < 1e-9);
    }
}
