use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("size mismatch: left has {left} points, right has {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("spectral series not converged after k_max = {k_max} terms")]
    Truncation { k_max: usize },

    #[error("time {t} is below the minimum supported time {t_min}")]
    BelowMinTime { t: f64, t_min: f64 },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("cost matrix has a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("problem of size {n} exceeds the limit {limit}")]
    TooLarge { n: usize, limit: usize },

    #[error("reference size {reference} is not a multiple of sample size {sample}")]
    Divisibility { reference: usize, sample: usize },

    #[error("need at least {needed} successful replicas at n = {n}, got {got}")]
    InsufficientReplicas { n: usize, needed: usize, got: usize },

    #[error("degenerate design matrix: {0}")]
    DegenerateDesign(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
