use thiserror::Error;

/// Errors raised by matrix constructors and register operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("register sizes {registers:?} do not factor dimension {dim}")]
    RegisterMismatch { dim: usize, registers: Vec<usize> },

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not symmetric (max deviation {0:e})")]
    NotSymmetric(f64),

    #[error("operation requires register metadata")]
    MissingRegisters,

    #[error("register index {index} out of range for {count} registers")]
    InvalidRegister { index: usize, count: usize },

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("malformed matrix data: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
