use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the scoring pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("value is zero or non-finite and carries no leading digit")]
    ZeroOrNonFinite,

    #[error("digit {0} is outside 1..=9")]
    InvalidDigit(u32),

    #[error("histogram is empty")]
    EmptyHistogram,

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{skipped} of {draws} draws produced no leading digit")]
    TooManySkips { skipped: usize, draws: usize },

    #[error("no cached reference for {0}")]
    CacheMiss(String),

    #[error("corrupt reference cache {path}: {reason}")]
    CorruptCache { path: PathBuf, reason: String },

    #[error("reference for {0} has not been calibrated")]
    UncalibratedReference(String),

    #[error("no usable outcomes: {0}")]
    NoUsableOutcomes(String),

    #[error("no numeric column with at least two values")]
    NoNumericColumns,

    #[error("malformed CSV at line {line}: {reason}")]
    MalformedCsv { line: u64, reason: String },

    #[error("schema violation at {pointer}: {reason}")]
    SchemaViolation { pointer: String, reason: String },

    #[error("unknown operator {0:?} (expected one of: mean, std, ols_slope)")]
    UnknownOperator(String),

    #[error("{0}")]
    Precondition(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
