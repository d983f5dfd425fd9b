use std::path::PathBuf;

use chrono::NaiveDate;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: header mismatch, expected `{expected}`, found `{found}`")]
    Header {
        path: String,
        expected: String,
        found: String,
    },

    #[error("{path}:{line}: {message}")]
    Row {
        path: String,
        line: u64,
        message: String,
    },

    #[error("invalid bar {ticker} {date}: {reason}")]
    InvalidBar {
        ticker: String,
        date: NaiveDate,
        reason: String,
    },

    #[error("duplicate key {0}")]
    DuplicateKey(String),

    #[error("nonpositive split ratio {0}")]
    NonPositiveRatio(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("zero denominator at index {0}")]
    ZeroDenominator(usize),

    #[error("zero variance in {0}")]
    ZeroVariance(&'static str),

    #[error("before-period total is zero; ratio undefined")]
    ZeroBenchmark,

    #[error("no bar on or after {date} for {ticker}; cannot anchor day 0")]
    CannotAnchor { ticker: String, date: NaiveDate },

    #[error("coverage {actual:.4} below required {required:.4}")]
    Coverage { actual: f64, required: f64 },

    #[error("offset range [{lo}, {hi}] has no bars")]
    EmptyRange { lo: i64, hi: i64 },

    #[error("no bar within {tolerance} trading days of offset {offset}")]
    MissingBar { offset: i64, tolerance: i64 },

    #[error("missing record: {0}")]
    MissingRecord(String),

    #[error("unknown selector `{0}`")]
    UnknownSelector(String),

    #[error("config: {0}")]
    Config(String),

    #[error("no analyzable samples")]
    NoAnalyzableSamples,

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for this error: 1 input, 2 no samples, 3 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. }
            | Error::Header { .. }
            | Error::Row { .. }
            | Error::InvalidBar { .. }
            | Error::DuplicateKey(_)
            | Error::NonPositiveRatio(_)
            | Error::InvalidParameter(_)
            | Error::UnknownSelector(_)
            | Error::Config(_)
            | Error::Json(_) => 1,
            Error::NoAnalyzableSamples => 2,
            _ => 3,
        }
    }
}
