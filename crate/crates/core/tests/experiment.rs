use std::process::Command;

use cgantune::cgan::{train_and_select, CganConfig, SampleMode};
use cgantune::config::ExperimentConfig;
use cgantune::experiment::*;
use cgantune::synthetic;

mod common;

use common::experiment::{small_experiment, snapshot_dir};

#[test]
fn run_writes_every_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_experiment(dir.path());
    let info = run_experiment(&cfg).unwrap();
    assert_eq!(
        info.failures,
        0,
        "{:?}",
        std::fs::read_to_string(cfg.output_dir.join(FAILURES))
    );
    assert_eq!(info.assets.len(), 3);
    assert_eq!(info.config_hash, cfg.hash());

    let out = &cfg.output_dir;
    for f in [
        CASE1_REPORTS,
        CASE1_CURVES,
        CASE1_SUMMARY,
        CASE2_REPORTS,
        CASE2_GRIDS,
        CASE2_QUANTILES,
        CASE2_RANKS,
        CGAN_CURVES,
        FAILURES,
        RUN_INFO,
    ] {
        assert!(out.join(f).exists(), "{f}");
    }
    let case1 = read_rows(&out.join(CASE1_REPORTS)).unwrap();
    assert_eq!(case1.len(), 3 * 2 * 2 * 3);
    assert!(case1.iter().all(|r| r.config_hash == info.config_hash));
    assert_eq!(read_rows(&out.join(CASE1_CURVES)).unwrap().len(), 3 * 2 * 2 * 20);
    assert_eq!(read_rows(&out.join(CASE2_REPORTS)).unwrap().len(), 3 * 8 * 3);

    let again = tempfile::tempdir().unwrap();
    aggregate_reports(out, again.path(), cfg.case2.alpha).unwrap();
    for f in [CASE1_SUMMARY, CASE2_QUANTILES, CASE2_RANKS] {
        assert_eq!(
            std::fs::read(out.join(f)).unwrap(),
            std::fs::read(again.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_experiment(dir.path());
    cfg.case2.enabled = false;
    cfg.workers = 1;
    run_experiment(&cfg).unwrap();
    let one = snapshot_dir(&cfg.output_dir);
    cfg.workers = 3;
    cfg.output_dir = dir.path().join("out3");
    run_experiment(&cfg).unwrap();
    assert_eq!(one, snapshot_dir(&cfg.output_dir));
}

#[test]
fn unreadable_assets_are_recorded_not_fatal() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_experiment(dir.path());
    cfg.case2.enabled = false;
    cfg.assets[1].path = dir.path().join("missing.csv");
    let info = run_experiment(&cfg).unwrap();
    assert_eq!(info.failed_assets, vec!["asset1".to_string()]);
    let rows = read_rows(&cfg.output_dir.join(CASE1_REPORTS)).unwrap();
    assert!(rows.iter().all(|r| r.asset != "asset1"));
    assert_eq!(rows.len(), 2 * 2 * 2 * 3);
}

#[test]
fn diagnose_writes_plot_ready_files() {
    let x = synthetic::ar1(0.5, 0.01, 300, 4);
    let cfg = CganConfig {
        p: 2,
        noise_dim: 2,
        gen_hidden: 6,
        disc_hidden: 6,
        epochs: 60,
        batch_size: 32,
        snap: 20,
        eval_samples: 3,
        learning_rate: 0.01,
    };
    let model = train_and_select(&x, &cfg, 1).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let d = diagnose(&model, &x, SampleMode::Recursive, 4, 10, 3, dir.path()).unwrap();
    assert_eq!(d.acf.len(), 10);
    assert_eq!(d.pacf.len(), 10);
    let half = 1.959963984540054 / (298f64).sqrt();
    for row in d.acf.iter().chain(&d.pacf) {
        assert!((row.upper - row.sample_mean - half).abs() < 1e-6);
        assert!((row.sample_mean - row.lower - half).abs() < 1e-6);
        assert_eq!(
            row.inside,
            row.real >= row.lower - 1e-15 && row.real <= row.upper + 1e-15
        );
    }
    let inside = d.acf.iter().filter(|r| r.inside).count() as f64 / 10.0;
    assert_eq!(d.acf_inside, inside);

    let lines = |f: &str| std::fs::read_to_string(dir.path().join(f)).unwrap().lines().count();
    assert_eq!(lines("rmse_curve.csv"), 1 + 60 / 20);
    assert_eq!(lines("sample_paths.csv"), 1 + 298);
    assert_eq!(lines("cum_returns.csv"), 1 + 298);
    assert_eq!(lines("acf.csv"), 1 + 10);
    let curve = std::fs::read_to_string(dir.path().join("rmse_curve.csv")).unwrap();
    assert_eq!(curve.lines().filter(|l| l.ends_with(",true")).count(), 1);
    let header = std::fs::read_to_string(dir.path().join("sample_paths.csv")).unwrap();
    assert!(header.starts_with("t,real,path_0,path_1,path_2,path_3\n"));
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cgantune"))
}

#[test]
fn cli_run_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_experiment(dir.path());
    cfg.case2.enabled = false;
    let file = dir.path().join("exp.toml");
    std::fs::write(&file, cfg.to_toml().unwrap()).unwrap();
    let mut outputs = Vec::new();
    for (name, workers) in [("a", "1"), ("b", "2")] {
        let out = dir.path().join(name);
        let status = cli()
            .args(["run", "--config"])
            .arg(&file)
            .arg("--out")
            .arg(&out)
            .args(["--workers", workers])
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(snapshot_dir(&out));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn cli_run_without_assets_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("empty.toml");
    std::fs::write(&file, "output_dir = \"out\"\n").unwrap();
    let status = cli().args(["run", "--config"]).arg(&file).status().unwrap();
    assert!(status.success());
    assert!(dir.path().join("out").join(RUN_INFO).exists());
}

#[test]
fn cli_prints_a_loadable_default_config() {
    let out = cli().arg("default-config").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut cfg = ExperimentConfig::from_toml_str(&text).unwrap();
    assert_eq!(cfg.assets.len(), 1);
    cfg.assets.clear();
    assert_eq!(cfg, ExperimentConfig::default());
}
