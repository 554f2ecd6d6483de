use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-positive price {price} on {date}")]
    NonPositivePrice { date: String, price: f64 },

    #[error("missing price on line {line} ({date})")]
    MissingPrice { line: usize, date: String },

    #[error("dates must be strictly increasing: {prev} followed by {next}")]
    UnorderedDates { prev: String, next: String },

    #[error("non-finite value at position {index}")]
    NonFinite { index: usize },

    #[error("benchmark series has {got} points, expected {expected}")]
    MisalignedBenchmark { expected: usize, got: usize },

    #[error("insufficient history: need more than {needed} observations, got {got}")]
    InsufficientHistory { needed: usize, got: usize },

    #[error("degenerate scale: {0}")]
    DegenerateScale(&'static str),

    #[error("undefined correlation: series is constant")]
    ConstantSeries,

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("training diverged at epoch {epoch}")]
    Divergence { epoch: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("zero volatility: ratio undefined")]
    ZeroVolatility,

    #[error("zero drawdown: Calmar ratio undefined")]
    ZeroDrawdown,

    #[error("singular system in {0}")]
    Singular(&'static str),

    #[error("ensemble member {member}: {source}")]
    Member {
        member: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("no grid configuration has enough valid folds")]
    NoValidConfiguration,

    #[error("holdout leakage: {0}")]
    Leakage(String),

    #[error("unsupported format version {0}")]
    FormatVersion(u32),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
