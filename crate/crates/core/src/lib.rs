pub mod backtest;
pub mod cgan;
pub mod config;
pub mod ensemble;
pub mod error;
pub mod experiment;
pub mod finetune;
pub mod nn;
pub mod resampling;
pub mod rng;
pub mod stats;
pub mod strategies;
pub mod synthetic;
pub mod timeseries;

pub use error::{Error, Result};
