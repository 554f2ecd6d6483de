//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

pub mod experiment;
pub mod learners;
pub mod metrics;
pub mod splits;
pub mod stats;

use cgantune::nn::{HiddenActivation, MlpNet};
use ndarray::{Array2, ArrayView2};

/// Outcome of a central-difference gradient check.
#[derive(Debug, Default)]
pub struct GradCheck {
    pub checked: usize,
    pub skipped_kinks: usize,
    pub max_rel_error: f64,
}

fn loss(net: &MlpNet, x: ArrayView2<f64>, upstream: &Array2<f64>) -> f64 {
    let out = net.predict(x).unwrap();
    (&out * upstream).sum()
}

fn relu_pattern(net: &MlpNet, x: ArrayView2<f64>) -> Vec<bool> {
    net.forward(x)
        .unwrap()
        .pre_activations
        .iter()
        .take(net.weights().len() - 1)
        .flat_map(|z| z.iter().map(|&v| v > 0.0).collect::<Vec<_>>())
        .collect()
}

/// Compare analytic parameter gradients of `sum(upstream * net(x))` against
/// central differences with step `eps`. At most `per_layer` weights and
/// `per_layer` biases are probed per layer (evenly strided). Probes whose
/// perturbation flips a ReLU are skipped: the loss is not differentiable
/// there.
pub fn check_gradients(
    net: &MlpNet,
    x: ArrayView2<f64>,
    upstream: &Array2<f64>,
    eps: f64,
    per_layer: usize,
) -> GradCheck {
    let pass = net.forward(x).unwrap();
    let (grads, _) = net.backward(&pass, upstream.view()).unwrap();
    let relu = net.hidden_activation() == HiddenActivation::Relu;
    let mut report = GradCheck::default();
    let mut probe = |analytic: f64, set: &dyn Fn(&mut MlpNet, f64), orig: f64| {
        let mut plus = net.clone();
        set(&mut plus, orig + eps);
        let mut minus = net.clone();
        set(&mut minus, orig - eps);
        if relu && relu_pattern(&plus, x) != relu_pattern(&minus, x) {
            report.skipped_kinks += 1;
            return;
        }
        let numeric = (loss(&plus, x, upstream) - loss(&minus, x, upstream)) / (2.0 * eps);
        let scale = analytic.abs().max(numeric.abs()).max(1e-7);
        let rel = (analytic - numeric).abs() / scale;
        report.max_rel_error = report.max_rel_error.max(rel);
        report.checked += 1;
    };
    for layer in 0..net.weights().len() {
        let w = &net.weights()[layer];
        let n = w.len();
        let stride = (n / per_layer).max(1);
        for flat in (0..n).step_by(stride).take(per_layer) {
            let (r, c) = (flat / w.ncols(), flat % w.ncols());
            let orig = w[[r, c]];
            probe(
                grads.weights[layer][[r, c]],
                &|m: &mut MlpNet, v| m.weights_mut()[layer][[r, c]] = v,
                orig,
            );
        }
        let b = &net.biases()[layer];
        let stride = (b.len() / per_layer).max(1);
        for j in (0..b.len()).step_by(stride).take(per_layer) {
            let orig = b[j];
            probe(
                grads.biases[layer][j],
                &|m: &mut MlpNet, v| m.biases_mut()[layer][j] = v,
                orig,
            );
        }
    }
    report
}

/// Solve `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}
