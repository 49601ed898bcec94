use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A caller broke an operation's precondition (shapes, index ranges,
    /// distribution row sums).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("training failed at step {step}: {message}")]
    Training { step: u64, message: String },

    #[error("cannot reach parameter fraction {target:.4}; closest achievable is {closest:.4}")]
    Sizing { target: f64, closest: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("cannot load model: {0}")]
    Load(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidArgument(message.into())
    }

    pub(crate) fn contract(message: impl Into<String>) -> Self {
        Error::Contract(message.into())
    }
}
