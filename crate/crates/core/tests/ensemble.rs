use cgantune::backtest::rmse;
use cgantune::ensemble::{build_ensemble, mean_prediction, member_dataset, variance_decomposition, Resampler};
use cgantune::rng::rng_from_seed;
use cgantune::strategies::LearnerSpec;
use cgantune::synthetic;
use cgantune::timeseries::{build_lagged, lagged_holdout};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

mod common;

use common::stats::sign_test_p;

const BOOT: Resampler<'static> = Resampler::StatBoot { expected_block: 20.0 };

fn mse(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64
}

#[test]
fn prediction_is_the_member_average() {
    let x = synthetic::ar1(0.3, 0.01, 400, 1);
    let e = build_ensemble(&BOOT, &LearnerSpec::reg_tree(), &x, 4, 7, 3).unwrap();
    let data = build_lagged(&x, 4).unwrap();
    let members = e.member_predictions(data.features.view()).unwrap();
    let pred = e.predict(data.features.view()).unwrap();
    for t in 0..data.len() {
        let hand = members.iter().map(|m| m[t]).sum::<f64>() / 7.0;
        assert!((pred[t] - hand).abs() < 1e-15);
    }
    let single = build_ensemble(&BOOT, &LearnerSpec::reg_tree(), &x, 4, 1, 3).unwrap();
    assert_eq!(single.predict(data.features.view()).unwrap(), members[0]);
}

#[test]
fn mean_of_constants_and_mirrors() {
    assert_eq!(mean_prediction(&[vec![1.0, 1.0], vec![3.0, 3.0]]), vec![2.0, 2.0]);
    assert_eq!(mean_prediction(&[vec![0.5, -2.0], vec![-0.5, 2.0]]), vec![0.0, 0.0]);
}

#[test]
fn member_datasets_come_from_the_in_sample_rows() {
    let x = synthetic::ar1(0.3, 0.01, 300, 2);
    let real = build_lagged(&x, 3).unwrap();
    let d = member_dataset(&BOOT, &x, 3, 5, 9).unwrap();
    assert_eq!(d.len(), real.len());
    for i in 0..d.len() {
        let row = d.features.row(i);
        let hit = (0..real.len()).find(|&j| real.features.row(j) == row).unwrap();
        assert_eq!(d.targets[i], real.targets[hit]);
    }
}

#[test]
fn ensemble_training_error_never_exceeds_the_average_member_error() {
    let x = synthetic::ar1(0.5, 0.01, 500, 4);
    let data = build_lagged(&x, 5).unwrap();
    let e = build_ensemble(&BOOT, &LearnerSpec::reg_tree(), &x, 5, 15, 1).unwrap();
    let members = e.member_predictions(data.features.view()).unwrap();
    let ens = mse(&data.targets, &mean_prediction(&members));
    let avg = members.iter().map(|m| mse(&data.targets, m)).sum::<f64>() / 15.0;
    assert!(ens <= avg);
}

#[test]
fn two_member_variance_identity_is_exact() {
    let a = [1.0, 3.0, -2.0, 0.5, 4.0];
    let b = [2.0, -1.0, 0.0, 1.5, 3.0];
    let v = variance_decomposition(&[a.to_vec(), b.to_vec()]).unwrap();
    let mean = |x: &[f64]| x.iter().sum::<f64>() / x.len() as f64;
    let (ma, mb) = (mean(&a), mean(&b));
    let var_a = a.iter().map(|x| (x - ma).powi(2)).sum::<f64>() / 5.0;
    let var_b = b.iter().map(|x| (x - mb).powi(2)).sum::<f64>() / 5.0;
    let cov = a.iter().zip(&b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / 5.0;
    assert!((v.ensemble_variance - (var_a + var_b + 2.0 * cov) / 4.0).abs() < 1e-12);
    assert!((v.avg_variance - (var_a + var_b) / 2.0).abs() < 1e-12);
    assert!((v.avg_correlation - cov / (var_a * var_b).sqrt()).abs() < 1e-12);
}

#[test]
fn independent_members_divide_the_variance() {
    let mut rng = rng_from_seed(6);
    let members: Vec<Vec<f64>> = (0..25)
        .map(|_| (0..20_000).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    let v = variance_decomposition(&members).unwrap();
    let target = v.avg_variance / 25.0;
    assert!(
        (v.ensemble_variance - target).abs() < 0.05 * target,
        "{} vs {target}",
        v.ensemble_variance
    );
    assert!(v.avg_correlation.abs() < 0.01);
}

#[test]
fn bagging_trees_reduces_holdout_error() {
    let mut wins = 0;
    let seeds = 12;
    for seed in 0..seeds {
        let x = synthetic::ar1(0.6, 0.01, 700, seed);
        let (ins, out) = x.split_at(500);
        let test = lagged_holdout(ins, out, 5).unwrap();
        let e = build_ensemble(&BOOT, &LearnerSpec::reg_tree(), ins, 5, 30, seed).unwrap();
        let reports = e.incremental_reports(&test).unwrap();
        if reports[29].rmse < reports[0].rmse {
            wins += 1;
        }
        let direct = rmse(&test.targets, &e.predict(test.features.view()).unwrap()).unwrap();
        assert_eq!(reports[29].rmse, direct);
    }
    assert!(sign_test_p(wins, seeds as usize) < 0.05, "{wins}/{seeds}");
}

proptest! {
    #[test]
    fn ensemble_variance_is_bounded_by_the_largest_member(seed in any::<u64>(), b in 2usize..8) {
        let mut rng = rng_from_seed(seed);
        let members: Vec<Vec<f64>> = (0..b)
            .map(|_| (0..30).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let v = variance_decomposition(&members).unwrap();
        prop_assert!(v.ensemble_variance <= v.max_variance + 1e-12);
        prop_assert!(v.ensemble_variance <= v.avg_variance + 1e-12);
    }
}
