use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, BtsError>;

#[derive(Debug, Error, Clone)]
pub enum BtsError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("partition mismatch: {left} vs {right}")]
    PartitionMismatch { left: String, right: String },

    #[error("tensor is not mu-symmetric: entries {first} and {second} differ by {deviation:e}")]
    NotSymmetric {
        first: String,
        second: String,
        deviation: f64,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("root finding did not converge after {iterations} iterations ({} partial roots)", partial.len())]
    NoConvergence {
        iterations: usize,
        partial: Vec<Complex64>,
    },

    #[error("isotropic critical point ({0}); retry after a random rotation")]
    Isotropic(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("general position failure: {0}")]
    GeneralPosition(String),

    #[error("formula cross-check failed: {0}")]
    CrossCheck(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}
