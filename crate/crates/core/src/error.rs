use thiserror::Error;

/// Errors produced by the steering library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("vector is not normalized: |n| = {norm}")]
    Normalization { norm: f64 },

    #[error("matrix trace {trace} differs from 1")]
    Trace { trace: f64 },

    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("parse error at line {line}, column {column} ({field}): {message}")]
    Parse {
        line: usize,
        column: usize,
        field: String,
        message: String,
    },

    #[error("not a valid density matrix: {0}")]
    Validation(String),

    #[error("settings {first} and {second} are equal or antipodal")]
    DuplicateSetting { first: usize, second: usize },

    #[error("{what} = {value} exceeds the supported maximum {max}")]
    Cap {
        what: &'static str,
        value: usize,
        max: usize,
    },

    #[error("solver stalled: {0}")]
    SolverStall(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
