use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cgantune::backtest::{vol_scale, ReportRow};
use cgantune::cgan::{train_and_select, CganConfig, CganModel, SampleMode, SizeClass};
use cgantune::config::{cgan_size, AssetInput, ExperimentConfig};
use cgantune::ensemble::{build_ensemble, Resampler};
use cgantune::experiment::{aggregate_reports, diagnose, run_experiment, write_json, write_rows};
use cgantune::finetune::{finalize_and_test, grid_search, Scheme};
use cgantune::strategies::{LearnerKind, LearnerSpec};
use cgantune::timeseries::io::{load_returns, write_returns_file};
use cgantune::timeseries::{lagged_holdout, ReturnSeries};
use cgantune::{Error, Result};

#[derive(Parser)]
#[command(
    name = "cgantune",
    version,
    about = "cGAN resampling for tuning and bagging trading strategies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a price file into excess log returns.
    Ingest {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Rescale returns to this annualised volatility.
        #[arg(long)]
        target_vol: Option<f64>,
    },
    #[command(subcommand)]
    Cgan(CganCommand),
    #[command(subcommand)]
    Ensemble(EnsembleCommand),
    #[command(subcommand)]
    Finetune(FinetuneCommand),
    #[command(subcommand)]
    Report(ReportCommand),
    /// Run every case of an experiment config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Asset-level worker threads.
        #[arg(long, env = "CGANTUNE_WORKERS")]
        workers: Option<usize>,
    },
    /// Print the default experiment config.
    DefaultConfig,
}

#[derive(Subcommand)]
enum CganCommand {
    /// Train a generator and keep the snapshot with the lowest sample RMSE.
    Train {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "medium")]
        size: SizeClass,
        /// Final observations withheld from training.
        #[arg(long, default_value_t = 1260)]
        holdout: usize,
        #[command(flatten)]
        params: CganParams,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write plot-ready diagnostics for a trained generator.
    Diagnose {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1260)]
        holdout: usize,
        #[arg(long, default_value_t = 20)]
        paths: usize,
        #[arg(long, default_value_t = 63)]
        lags: usize,
        #[arg(long, default_value = "recursive")]
        mode: SampleMode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct CganParams {
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    snap: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    lags: Option<usize>,
    #[arg(long)]
    noise_dim: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
}

#[derive(Subcommand)]
enum EnsembleCommand {
    /// Build a bagged ensemble and backtest it on the holdout.
    Run {
        /// `stat-boot` or `cgan-small`, `cgan-medium`, `cgan-large`.
        #[arg(long)]
        resampler: String,
        #[arg(long, default_value = "reg_tree")]
        learner: LearnerKind,
        #[arg(long = "B", default_value_t = 20)]
        b: usize,
        /// Generator directory, required for cGAN resamplers.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1260)]
        holdout: usize,
        #[arg(long, default_value_t = 252)]
        lags: usize,
        #[arg(long, default_value_t = 20.0)]
        block: f64,
        #[arg(long)]
        out: PathBuf,
        /// Per-member incremental curve.
        #[arg(long)]
        curves: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum FinetuneCommand {
    /// Grid-search a learner under one validation scheme and backtest the
    /// selected configuration on the holdout.
    Run {
        #[arg(long)]
        scheme: String,
        #[arg(long)]
        learner: LearnerKind,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1260)]
        holdout: usize,
        /// Generator directory, required for cGAN schemes.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Experiment config supplying scheme parameters and grids.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum ReportCommand {
    /// Recompute summary tables from report CSVs.
    Aggregate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
}

fn normalise(name: &str) -> String {
    name.replace('-', "_")
}

fn in_sample_split(input: &PathBuf, holdout: usize) -> Result<(ReturnSeries, ReturnSeries)> {
    load_returns(input)?.split_holdout(holdout)
}

fn load_model(model: &Option<PathBuf>, p: usize) -> Result<CganModel> {
    let dir = model
        .as_ref()
        .ok_or_else(|| Error::Config("cGAN resampling needs --model".into()))?;
    let m = CganModel::load(dir)?;
    if m.p() != p {
        return Err(Error::Config(format!("model uses {} lags, expected {p}", m.p())));
    }
    Ok(m)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Ingest { input, out, target_vol } => {
            let mut returns = load_returns(&input)?;
            if let Some(vol) = target_vol {
                let scaled = vol_scale(returns.values(), vol)?;
                returns = ReturnSeries::new(returns.dates().to_vec(), scaled)?;
            }
            write_returns_file(&returns, &out)?;
            eprintln!("wrote {} returns to {}", returns.len(), out.display());
        }
        Command::Cgan(CganCommand::Train {
            input,
            out,
            size,
            holdout,
            params,
            seed,
        }) => {
            let (in_sample, _) = in_sample_split(&input, holdout)?;
            let mut cfg = CganConfig::sized(size);
            cfg.epochs = params.epochs.unwrap_or(cfg.epochs);
            cfg.snap = params.snap.unwrap_or(cfg.snap);
            cfg.eval_samples = params.samples.unwrap_or(cfg.eval_samples);
            cfg.learning_rate = params.lr.unwrap_or(cfg.learning_rate);
            cfg.p = params.lags.unwrap_or(cfg.p);
            cfg.noise_dim = params.noise_dim.unwrap_or(cfg.noise_dim);
            cfg.batch_size = params.batch_size.unwrap_or(cfg.batch_size);
            cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
            let model = train_and_select(in_sample.values(), &cfg, seed)?;
            model.save(&out)?;
            eprintln!(
                "selected epoch {} (rmse {:.6}) of {}",
                model.selected.epoch,
                model.selected.rmse,
                model.curve.len()
            );
        }
        Command::Cgan(CganCommand::Diagnose {
            model,
            input,
            out,
            holdout,
            paths,
            lags,
            mode,
            seed,
        }) => {
            let model = CganModel::load(&model)?;
            let (in_sample, _) = in_sample_split(&input, holdout)?;
            let d = diagnose(&model, in_sample.values(), mode, paths, lags, seed, &out)?;
            eprintln!(
                "acf inside band: {:.1}%, pacf inside band: {:.1}%",
                100.0 * d.acf_inside,
                100.0 * d.pacf_inside
            );
        }
        Command::Ensemble(EnsembleCommand::Run {
            resampler,
            learner,
            b,
            model,
            input,
            holdout,
            lags,
            block,
            out,
            curves,
            seed,
        }) => {
            let name = normalise(&resampler);
            let (in_sample, test) = in_sample_split(&input, holdout)?;
            let spec = match learner {
                LearnerKind::Mlp => LearnerSpec::mlp(200, 0.00001),
                LearnerKind::RegTree => LearnerSpec::reg_tree(),
                other => other.default_grid().remove(0),
            };
            let generator;
            let rs = if name == "stat_boot" {
                Resampler::StatBoot { expected_block: block }
            } else if cgan_size(&name).is_some() {
                generator = load_model(&model, lags)?;
                Resampler::Cgan {
                    name: &name,
                    model: &generator,
                }
            } else {
                return Err(Error::Config(format!("unknown resampler {resampler:?}")));
            };
            let ens = build_ensemble(&rs, &spec, in_sample.values(), lags, b, seed)?;
            let test = lagged_holdout(in_sample.values(), test.values(), lags)?;
            let reports = ens.incremental_reports(&test)?;
            let rows: Vec<ReportRow> = reports
                .iter()
                .enumerate()
                .map(|(i, r)| ReportRow::new(&input.display().to_string(), &name, learner.name(), i + 1, r))
                .collect();
            write_json(&out, &reports[b - 1])?;
            if let Some(path) = curves {
                write_rows(&path, &rows)?;
            }
            let last = &rows[b - 1];
            eprintln!(
                "B={b} sharpe {:?} calmar {:?} rmse {:.6}",
                last.sharpe, last.calmar, last.rmse
            );
        }
        Command::Finetune(FinetuneCommand::Run {
            scheme,
            learner,
            input,
            holdout,
            model,
            config,
            out,
            seed,
        }) => {
            let mut cfg = match config {
                Some(path) => ExperimentConfig::load(&path)?,
                None => ExperimentConfig::default(),
            };
            cfg.holdout = holdout;
            let name = normalise(&scheme);
            let c = &cfg.case2;
            let (in_sample, test) = in_sample_split(&input, holdout)?;
            let generator;
            let scheme = match name.as_str() {
                "naive" => Scheme::Naive,
                "sliding" => Scheme::Sliding {
                    window: c.window,
                    stride: c.stride,
                },
                "block" => Scheme::Block { block: c.block },
                "hv_block" => Scheme::HvBlock {
                    block: c.block,
                    gap: c.gap,
                },
                "one_split" => Scheme::OneSplit { h: c.one_split_h },
                "kfold" => Scheme::KFold { k: c.k },
                "stat_boot" => Scheme::StatBoot {
                    b: c.boot_b,
                    expected_block: c.boot_block,
                },
                other if cgan_size(other).is_some() => {
                    generator = load_model(&model, cfg.lags)?;
                    Scheme::Cgan {
                        name: &name,
                        model: &generator,
                        b: c.cgan_b,
                        h: c.cgan_h,
                    }
                }
                _ => return Err(Error::Config(format!("unknown scheme {scheme:?}"))),
            };
            let grid = c.grids.grid(learner);
            let result = grid_search(&scheme, &grid, in_sample.values(), cfg.lags, seed)?;
            let report = finalize_and_test(&result, in_sample.values(), test.values(), cfg.lags, seed)?;
            #[derive(serde::Serialize)]
            struct Output<'a> {
                grid: &'a cgantune::finetune::GridResult,
                selected: String,
                holdout: &'a cgantune::backtest::BacktestReport,
            }
            write_json(
                &out,
                &Output {
                    grid: &result,
                    selected: result.selected_spec().label(),
                    holdout: &report,
                },
            )?;
            eprintln!("selected {} holdout sharpe {:?}", result.selected_spec(), report.sharpe);
        }
        Command::Report(ReportCommand::Aggregate { input, out, alpha }) => {
            aggregate_reports(&input, &out, alpha)?;
        }
        Command::Run {
            config,
            seed,
            out,
            workers,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(o) = out {
                cfg.output_dir = o;
            }
            if let Some(w) = workers {
                cfg.workers = w;
            }
            if cfg.assets.is_empty() {
                eprintln!("warning: no assets configured");
            }
            let info = run_experiment(&cfg)?;
            eprintln!(
                "{} assets, {} failures, config {}",
                info.assets.len(),
                info.failures,
                info.config_hash
            );
            if info.failures > 0 {
                return Ok(ExitCode::from(2));
            }
        }
        Command::DefaultConfig => {
            let mut cfg = ExperimentConfig::default();
            cfg.assets.push(AssetInput {
                name: "SPX".into(),
                path: "data/spx.csv".into(),
            });
            print!("{}", cfg.to_toml()?);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
