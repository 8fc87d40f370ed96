//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error at data row {row}: {msg}")]
    Csv { row: usize, msg: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitIndex { index: usize, n_qubits: usize },

    #[error("{what} supports at most {cap} qubits, requested {got}")]
    QubitCap {
        what: &'static str,
        cap: usize,
        got: usize,
    },

    #[error("unbound circuit parameter slot {0}")]
    UnboundParam(usize),

    #[error("class {0} has no members")]
    EmptyClass(usize),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("training diverged: loss {0} exceeded the divergence guard")]
    Diverged(f64),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
