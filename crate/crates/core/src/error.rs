use thiserror::Error;

use crate::qcore::Qubit;

/// Errors produced by the simulator and the analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown qubit label {0}")]
    UnknownQubit(Qubit),

    #[error("zero-probability branch (p = {0:e})")]
    ZeroProbability(f64),

    #[error("register of {qubits} qubits exceeds the dense cap of {cap}; use the analytic evaluator")]
    CapExceeded { qubits: usize, cap: usize },

    #[error("protocol cannot be carried out: {0}")]
    ProtocolImpossible(String),

    #[error("no root: {0}")]
    NoRoot(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
