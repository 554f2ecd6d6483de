//! A scaled-down experiment over synthetic assets.

use std::path::Path;

use cgantune::config::{AssetInput, ExperimentConfig};
use cgantune::strategies::{LearnerKind, LearnerSpec};
use cgantune::synthetic;
use cgantune::timeseries::io::write_returns_file;
use cgantune::timeseries::ReturnSeries;

pub const ASSET_LEN: usize = 400;

/// Three AR(1) assets written under `dir`, with every case enabled on
/// reduced grids and a small generator.
pub fn small_experiment(dir: &Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.output_dir = dir.join("out");
    for (i, phi) in [0.3, -0.2, 0.6].into_iter().enumerate() {
        let name = format!("asset{i}");
        let path = dir.join(format!("{name}.csv"));
        let series = ReturnSeries::from_values(synthetic::ar1(phi, 0.01, ASSET_LEN, 100 + i as u64)).unwrap();
        write_returns_file(&series, &path).unwrap();
        cfg.assets.push(AssetInput { name, path });
    }
    cfg.holdout = 100;
    cfg.lags = 5;

    cfg.cgan.noise_dim = 5;
    cfg.cgan.epochs = 200;
    cfg.cgan.batch_size = 32;
    cfg.cgan.snap = 50;
    cfg.cgan.eval_samples = 5;

    cfg.case1.resamplers = vec!["stat_boot".into(), "cgan_small".into()];
    cfg.case1.b_values = vec![1, 10, 20];
    cfg.case1.learners = vec![
        LearnerSpec::reg_tree(),
        LearnerSpec::Mlp {
            hidden: 8,
            weight_decay: 1e-3,
            epochs: 20,
            learning_rate: 0.01,
            batch_size: 32,
        },
    ];

    let c = &mut cfg.case2;
    c.schemes = [
        "naive",
        "sliding",
        "block",
        "hv_block",
        "one_split",
        "kfold",
        "stat_boot",
        "cgan_small",
    ]
    .map(String::from)
    .to_vec();
    c.learners = vec![LearnerKind::Ridge, LearnerKind::Gbt, LearnerKind::Mlp];
    c.window = 50;
    c.stride = 50;
    c.block = 50;
    c.gap = 5;
    c.one_split_h = 60;
    c.k = 5;
    c.boot_b = 10;
    c.cgan_b = 5;
    c.cgan_h = 60;
    c.grids.ridge_shrinkage = vec![0.01, 1.0, 100.0];
    c.grids.gbt_trees = vec![10];
    c.grids.gbt_learning_rates = vec![0.1];
    c.grids.gbt_depths = vec![1, 2];
    c.grids.mlp_neurons = vec![4];
    c.grids.mlp_weight_decay = vec![0.01, 1.0];
    cfg
}

/// Every regular file under `dir` with its bytes, sorted by relative path.
pub fn snapshot_dir(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                files.push((rel, std::fs::read(&path).unwrap()));
            }
        }
    }
    files.sort();
    files
}
