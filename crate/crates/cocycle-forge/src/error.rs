//! Error type shared by the whole crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not close enough to orthogonal (defect {defect:.3e})")]
    NotOrthogonal { defect: f64 },

    #[error("lambda must lie in (0, 1), got {0}")]
    LambdaRange(f64),

    #[error("base point does not belong to the base system ({0})")]
    BaseMismatch(String),

    #[error("section cannot be evaluated at the requested point ({0})")]
    SectionDomain(String),

    #[error("small denominator at harmonic k = {k}: |denom| = {denom:.3e} < {threshold:.3e}")]
    SmallDenominator { k: i64, denom: f64, threshold: f64 },

    #[error("singular system at lambda = {lambda}: kernel dimension {kernel_dim}")]
    SingularSystem { lambda: f64, kernel_dim: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
