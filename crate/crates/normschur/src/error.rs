use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("input is not skew-symmetric (relative asymmetry {0:.3e})")]
    NotSkew(f64),
    #[error("odd dimension {0} where an even one is required")]
    OddDimension(usize),
    #[error("QR iteration did not converge after {steps} steps (subdiagonal {residual:.3e})")]
    NoConvergence { steps: usize, residual: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
