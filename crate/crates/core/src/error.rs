use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("instance has no elements")]
    EmptyInstance,
    #[error("weight at index {index} is zero; weights must be positive")]
    ZeroWeight { index: usize },
    #[error("instance total is too large: the squared sum must fit a signed 64-bit integer")]
    Overflow,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{solver} solver supports at most {bound} elements, instance has {n}")]
    Capability {
        solver: &'static str,
        bound: usize,
        n: usize,
    },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("transport error: {0}")]
    Transport(String),
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("sub-problem {k}: {source}")]
    Subproblem {
        k: usize,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Network failures may succeed on retry; everything else is final.
    pub fn is_retriable(&self) -> bool {
        match self {
            Error::Transport(_) => true,
            Error::Subproblem { source, .. } => source.is_retriable(),
            _ => false,
        }
    }

    /// Strips [`Error::Subproblem`] wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Subproblem { source, .. } => source.root(),
            other => other,
        }
    }
}
