use thiserror::Error;

/// Errors produced while building systems, operators and sequences.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("spin index {index} out of range for {nspins} spins")]
    IndexOutOfRange { index: usize, nspins: usize },

    #[error("label length {got} does not match {expected} computational qubits")]
    LabelLength { expected: usize, got: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operator is not Hermitian (residual {0:e})")]
    NonHermitian(f64),

    #[error("unknown channel `{0}`")]
    UnknownChannel(String),

    #[error("empty sequence")]
    EmptySequence,

    #[error("no signal: every spectral line has zero amplitude")]
    NoSignal,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("eigendecomposition failed to converge")]
    Eigen,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
