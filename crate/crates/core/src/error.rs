use std::path::PathBuf;

use thiserror::Error;

/// Errors produced across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} bits, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "state would need {requested} amplitudes, above the cap of {cap}; \
         use the closed-form evaluation instead or raise the cap"
    )]
    ResourceCap { requested: u128, cap: u64 },

    #[error("input is never recognized: every stored pattern is at distance n and b >= 1")]
    NeverRecognized,

    #[error(
        "memory distribution requested on a state not collapsed to the all-zeros control outcome"
    )]
    NotCollapsedOnZero,

    #[error("infeasible tuning request: {0}")]
    Infeasible(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
