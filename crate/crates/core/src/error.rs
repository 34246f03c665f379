use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the solvers, screening helpers and data readers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("column {0} is constant and cannot be scaled")]
    ConstantColumn(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("response is degenerate (all observations in one class)")]
    DegenerateResponse,

    #[error("response must be binary (0/1); found {0} at row {1}")]
    NonBinaryResponse(f64, usize),

    #[error("coordinate descent did not converge within {sweeps} sweeps")]
    MaxSweepsExceeded { sweeps: usize },

    #[error("graphical lasso did not converge within {iterations} iterations")]
    NotConverged { iterations: usize },

    #[error("input covariance is not positive semi-definite: {0}")]
    NonPsdInput(String),

    #[error("design is rank deficient")]
    RankDeficient,

    #[error("correlation {r} is outside the admissible range for p = {p}")]
    InvalidCorrelation { p: usize, r: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid simulation spec: {0}")]
    InvalidSpec(String),

    #[error("strategies produced different solutions (max deviation {deviation:e})")]
    MismatchedSolutions { deviation: f64 },

    #[error("unknown rule '{name}'; valid rules: {valid}")]
    UnknownRule { name: String, valid: String },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
