//! Crate-wide error type.

/// Errors reported by the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian: max |M - M\u{2020}| = {deviation:.3e} exceeds {tolerance:.3e}")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("negative eigenvalue {value:.3e} below tolerance -{tolerance:.3e}; not a valid state")]
    NegativeEigenvalue { value: f64, tolerance: f64 },

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("invalid control resources: {0}")]
    InvalidResources(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
