use thiserror::Error;

/// Errors raised by scenario handling, queue analysis and the optimizer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("validation error in `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("message rate {requested} msg/s is above the B2M saturation level {saturation} msg/s")]
    UnreachableRate { requested: f64, saturation: f64 },

    #[error("unstable semantic-coding queue: utilization {utilization} >= 1")]
    UnstableScq { utilization: f64 },

    #[error("degenerate queue: effective arrival rate {0} <= 0")]
    DegenerateQueue(f64),

    #[error("truncation failure: mass {lost:e} beyond bound {bound}")]
    Truncation { bound: usize, lost: f64 },

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("contract violation: {0}")]
    Contract(String),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
