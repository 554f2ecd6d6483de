use cgantune::rng::rng_from_seed;
use cgantune::strategies::{fit, FittedModel, GbtModel, LearnerSpec};
use cgantune::synthetic;
use cgantune::timeseries::{build_lagged, LaggedDataset};
use ndarray::Array2;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

mod common;

use common::learners::{ridge_oracle, stump_oracle};

fn random_data(n: usize, d: usize, seed: u64) -> LaggedDataset {
    let mut rng = rng_from_seed(seed);
    let features = Array2::from_shape_fn((n, d), |_| rng.sample::<f64, _>(StandardNormal));
    let targets = (0..n)
        .map(|i| features[[i, 0]] - 0.5 * features[[i, d - 1]] + 0.3 * rng.sample::<f64, _>(StandardNormal))
        .collect();
    LaggedDataset {
        features,
        targets,
        p: d,
    }
}

fn predictions(model: &FittedModel, data: &LaggedDataset) -> Vec<f64> {
    model.predict(data.features.view()).unwrap()
}

fn mse(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64
}

#[test]
fn ridge_matches_normal_equations() {
    for (seed, alpha) in [(1, 1e-5), (2, 0.01), (3, 1.0), (4, 0.3)] {
        let data = random_data(40, 5, seed);
        let model = fit(&LearnerSpec::Ridge { shrinkage: alpha }, &data, 0).unwrap();
        let oracle = ridge_oracle(&data.features, &data.targets, alpha);
        let probe = random_data(25, 5, seed + 100);
        for (i, got) in predictions(&model, &probe).into_iter().enumerate() {
            let want = oracle(probe.features.row(i).as_slice().unwrap());
            assert!((got - want).abs() < 1e-8, "alpha {alpha}: {got} vs {want}");
        }
    }
}

#[test]
fn heavy_shrinkage_predicts_the_mean() {
    let data = random_data(60, 3, 5);
    let model = fit(&LearnerSpec::Ridge { shrinkage: 1e12 }, &data, 0).unwrap();
    let ybar = data.targets.iter().sum::<f64>() / 60.0;
    for p in predictions(&model, &data) {
        assert!((p - ybar).abs() < 1e-9);
    }
}

#[test]
fn ridge_recovers_a_linear_map() {
    let mut rng = rng_from_seed(9);
    let features = Array2::from_shape_fn((200, 4), |_| rng.sample::<f64, _>(StandardNormal));
    let targets: Vec<f64> = (0..200)
        .map(|i| 0.5 + 2.0 * features[[i, 0]] - features[[i, 2]] + 0.25 * features[[i, 3]])
        .collect();
    let data = LaggedDataset {
        features,
        targets,
        p: 4,
    };
    let model = fit(&LearnerSpec::Ridge { shrinkage: 1e-5 }, &data, 0).unwrap();
    let pred = predictions(&model, &data);
    let ybar = data.targets.iter().sum::<f64>() / 200.0;
    let ss_tot: f64 = data.targets.iter().map(|y| (y - ybar).powi(2)).sum();
    let r2 = 1.0 - mse(&data.targets, &pred) * 200.0 / ss_tot;
    assert!(r2 > 0.999, "R2 {r2}");
}

#[test]
fn one_stump_boosting_is_a_stump() {
    for seed in 0..5 {
        let data = random_data(50, 3, seed);
        let spec = LearnerSpec::Gbt {
            n_trees: 1,
            learning_rate: 1.0,
            max_depth: 1,
        };
        let model = fit(&spec, &data, 0).unwrap();
        let oracle = stump_oracle(&data.features, &data.targets);
        let probe = random_data(40, 3, seed + 50);
        for set in [&data, &probe] {
            for (i, got) in predictions(&model, set).into_iter().enumerate() {
                let want = oracle(set.features.row(i).as_slice().unwrap());
                assert!((got - want).abs() < 1e-12, "{got} vs {want}");
            }
        }
    }
}

#[test]
fn full_tree_memorises_distinct_rows() {
    let data = build_lagged(&synthetic::ar1(0.4, 0.01, 300, 2), 5).unwrap();
    let model = fit(&LearnerSpec::reg_tree(), &data, 0).unwrap();
    assert_eq!(predictions(&model, &data), data.targets);
}

#[test]
fn boosting_loss_never_increases() {
    let data = random_data(120, 4, 7);
    for (lr, depth) in [(0.1, 3), (1.0, 1), (0.5, 5)] {
        let model = GbtModel::fit(data.features.view(), &data.targets, 40, lr, depth);
        let mut last = f64::INFINITY;
        for n in 0..=40 {
            let m = model.truncated(n);
            let pred: Vec<f64> = data.features.rows().into_iter().map(|r| m.predict_row(r)).collect();
            let loss = mse(&data.targets, &pred);
            assert!(loss <= last + 1e-15, "lr {lr} depth {depth} round {n}: {loss} > {last}");
            last = loss;
        }
    }
}

#[test]
fn constant_target_is_predicted_by_every_learner() {
    let mut data = random_data(30, 3, 1);
    data.targets = vec![0.25; 30];
    let specs = [
        LearnerSpec::Ridge { shrinkage: 0.1 },
        LearnerSpec::reg_tree(),
        LearnerSpec::Gbt {
            n_trees: 5,
            learning_rate: 0.1,
            max_depth: 3,
        },
        LearnerSpec::mlp(4, 0.01),
    ];
    for spec in &specs {
        let model = fit(spec, &data, 3).unwrap();
        assert!(predictions(&model, &data).iter().all(|&p| p == 0.25), "{spec}");
    }
}

#[test]
fn mlp_fit_is_seed_deterministic() {
    let data = random_data(80, 3, 4);
    let spec = LearnerSpec::Mlp {
        hidden: 6,
        weight_decay: 0.01,
        epochs: 20,
        learning_rate: 0.01,
        batch_size: 16,
    };
    let a = fit(&spec, &data, 5).unwrap();
    assert_eq!(a, fit(&spec, &data, 5).unwrap());
    assert_ne!(a, fit(&spec, &data, 6).unwrap());
}

proptest! {
    #[test]
    fn ridge_oracle_agreement_on_random_problems(seed in any::<u64>(), alpha in 1e-4f64..10.0, d in 1usize..6) {
        let data = random_data(30, d, seed);
        let model = fit(&LearnerSpec::Ridge { shrinkage: alpha }, &data, 0).unwrap();
        let oracle = ridge_oracle(&data.features, &data.targets, alpha);
        for (i, got) in predictions(&model, &data).into_iter().enumerate() {
            let want = oracle(data.features.row(i).as_slice().unwrap());
            prop_assert!((got - want).abs() < 1e-8);
        }
    }
}
