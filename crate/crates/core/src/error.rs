use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension must be at least 2, got {0}")]
    InvalidDimension(usize),

    #[error("exponent must exceed 1, got {0}")]
    InvalidExponent(f64),

    #[error("argument {value} outside the representable range (limit {limit})")]
    Range { value: f64, limit: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("series too short: need at least {needed} samples, got {got}")]
    SeriesTooShort { needed: usize, got: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("nonpositive value in growth window at t = {0}")]
    NonPositiveWindow(f64),

    #[error("exponent relation (p-1)a = q-2 violated: residual {0:e}")]
    ExponentRelation(f64),

    #[error("threshold bracket did not close: {0}")]
    BracketNotClosed(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("input field has zero norm")]
    ZeroNorm,

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
