use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point {re}{im:+}i lies outside the admissible disk")]
    OutsideDisk { re: f64, im: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("truncation degree mismatch: {left} vs {right}")]
    DegreeMismatch { left: usize, right: usize },

    #[error("symbol is not a self-map of the disk (sampled margin {margin:.3e})")]
    NotSelfMap { margin: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("truncation too short for |w| = {modulus}: need N >= {required}")]
    Precision { modulus: f64, required: usize },

    #[error("no witness found: {0}")]
    NotFound(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
