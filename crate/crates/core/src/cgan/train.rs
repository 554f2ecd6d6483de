use ndarray::{concatenate, s, Array2, ArrayView2, Axis};
use rand::Rng as _;
use rand_distr::StandardNormal;

use super::sample::snapshot_rmse;
use super::{CganConfig, CganModel, GeneratorSnapshot, SnapshotRecord};
use crate::error::{Error, Result};
use crate::nn::{HiddenActivation, MlpNet, OutputActivation};
use crate::rng::{derive_seed, stream, Rng};
use crate::timeseries::{build_lagged, ScalerParams};

fn noise(rows: usize, dim: usize, rng: &mut Rng) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, dim), || rng.sample(StandardNormal))
}

fn hstack(a: ArrayView2<f64>, b: ArrayView2<f64>) -> Array2<f64> {
    concatenate(Axis(1), &[a, b]).expect("row counts agree")
}

/// Train a cGAN on `returns` and keep the snapshot with the lowest sample
/// RMSE.
pub fn train_and_select(returns: &[f64], config: &CganConfig, seed: u64) -> Result<CganModel> {
    config.validate()?;
    let p = config.p;
    if returns.len() <= p + 1 {
        return Err(Error::InsufficientHistory {
            needed: p + 1,
            got: returns.len(),
        });
    }
    let feature_scaler = ScalerParams::fit(returns)?;
    let target_scaler = ScalerParams::fit(&returns[p..])?;
    let scaled_features = feature_scaler.apply_all(returns);
    let lagged = build_lagged(&scaled_features, p)?;
    let targets: Vec<f64> = target_scaler.apply_all(&returns[p..]);
    let n_rows = lagged.len();

    let mut init_rng = stream(seed, "cgan-init", 0);
    let mut generator = MlpNet::new(
        &[config.noise_dim + p, config.gen_hidden, 1],
        HiddenActivation::Relu,
        OutputActivation::Linear,
        0.0,
        &mut init_rng,
    )?;
    let mut discriminator = MlpNet::new(
        &[1 + p, config.disc_hidden, 1],
        HiddenActivation::Relu,
        OutputActivation::Sigmoid,
        0.0,
        &mut init_rng,
    )?;

    let mut rng = stream(seed, "cgan-train", 0);
    let lr = config.learning_rate;
    let l = config.batch_size;
    let inv_l = 1.0 / l as f64;
    let mut curve = Vec::with_capacity(config.snapshot_count());
    let mut best: Option<GeneratorSnapshot> = None;

    for epoch in 1..=config.epochs {
        let rows: Vec<usize> = (0..l).map(|_| rng.random_range(0..n_rows)).collect();
        let cond = lagged.features.select(Axis(0), &rows);
        let real = Array2::from_shape_fn((l, 1), |(i, _)| targets[rows[i]]);

        // discriminator: ascend log D(real) + log(1 - D(fake))
        let z = noise(l, config.noise_dim, &mut rng);
        let fake = generator.predict(hstack(z.view(), cond.view()).view())?;
        let pass_real = discriminator.forward(hstack(real.view(), cond.view()).view())?;
        let pass_fake = discriminator.forward(hstack(fake.view(), cond.view()).view())?;
        let up_real = pass_real.output.mapv(|d| -inv_l / d);
        let up_fake = pass_fake.output.mapv(|d| inv_l / (1.0 - d));
        let mut d_grads = discriminator.param_gradients(&pass_real, up_real.view())?;
        d_grads.accumulate(&discriminator.param_gradients(&pass_fake, up_fake.view())?);
        discriminator.sgd_step(&d_grads, lr, epoch)?;

        // generator: ascend log D(G(z | v))
        let z = noise(l, config.noise_dim, &mut rng);
        let pass_gen = generator.forward(hstack(z.view(), cond.view()).view())?;
        let pass_disc = discriminator.forward(hstack(pass_gen.output.view(), cond.view()).view())?;
        let up = pass_disc.output.mapv(|d| -inv_l / d);
        let (_, d_input) = discriminator.backward(&pass_disc, up.view())?;
        let up_gen = d_input.slice(s![.., 0..1]).to_owned();
        let g_grads = generator.param_gradients(&pass_gen, up_gen.view())?;
        generator.sgd_step(&g_grads, lr, epoch)?;

        if epoch % config.snap == 0 {
            let mut snapshot = GeneratorSnapshot {
                generator: generator.clone(),
                discriminator: discriminator.clone(),
                epoch,
                rmse: f64::NAN,
                feature_scaler,
                target_scaler,
            };
            let eval_seed = derive_seed(seed, "cgan-eval", epoch as u64);
            let rmse = snapshot_rmse(&snapshot, p, config.noise_dim, returns, config.eval_samples, eval_seed)?;
            if !rmse.is_finite() {
                return Err(Error::Divergence { epoch });
            }
            snapshot.rmse = rmse;
            curve.push(SnapshotRecord {
                epoch,
                rmse,
                d_real: pass_real.output.mean(),
                d_fake: pass_fake.output.mean(),
            });
            if best.as_ref().is_none_or(|b| rmse < b.rmse) {
                best = Some(snapshot);
            }
        }
    }

    Ok(CganModel {
        selected: best.expect("validate() guarantees at least one snapshot"),
        curve,
        config: config.clone(),
        seed,
        train_len: returns.len(),
    })
}
