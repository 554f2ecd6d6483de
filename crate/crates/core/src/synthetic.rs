//! Synthetic series generators for tests, acceptance runs and demos.

use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::rng::rng_from_seed;

pub fn white_noise(len: usize, sigma: f64, seed: u64) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    (0..len).map(|_| sigma * rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Stationary AR(p) path `x_t = sum_i coefs[i] x_{t-1-i} + sigma e_t`, with a
/// burn-in of 500 steps discarded.
pub fn ar(coefs: &[f64], sigma: f64, len: usize, seed: u64) -> Vec<f64> {
    const BURN_IN: usize = 500;
    let mut rng = rng_from_seed(seed);
    let order = coefs.len();
    let mut x = vec![0.0; BURN_IN + len + order];
    for t in order..x.len() {
        let ar: f64 = coefs.iter().enumerate().map(|(i, c)| c * x[t - 1 - i]).sum();
        x[t] = ar + sigma * rng.sample::<f64, _>(StandardNormal);
    }
    x.split_off(BURN_IN + order)
}

pub fn ar1(phi: f64, sigma: f64, len: usize, seed: u64) -> Vec<f64> {
    ar(&[phi], sigma, len, seed)
}

/// Geometric price path whose log returns are `drift + AR(1)`.
pub fn ar1_prices(phi: f64, sigma: f64, drift: f64, len: usize, seed: u64) -> Vec<f64> {
    let rets = ar1(phi, sigma, len.saturating_sub(1), seed);
    let mut prices = Vec::with_capacity(len);
    let mut level = 100.0f64;
    prices.push(level);
    for r in rets {
        level *= (drift + r).exp();
        prices.push(level);
    }
    prices
}
