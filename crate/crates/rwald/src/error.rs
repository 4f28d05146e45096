//! Shared error type for construction, estimation, and simulation routines.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes surfaced by the library.
///
/// Programmer errors (mismatched buffer lengths, out-of-range probabilities
/// passed to pure math helpers) panic instead; every variant here can arise
/// from user-supplied configuration or from data-dependent conditions.
#[derive(Debug, Error)]
pub enum Error {
    /// Vector or matrix dimensions do not agree.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The steering vector has zero norm, so the amplitude estimate is undefined.
    #[error("steering vector has zero norm")]
    ZeroSteeringVector,

    /// The autoregression has a characteristic root on or outside the unit circle.
    #[error("autoregression is unstable (largest root modulus {max_root_modulus})")]
    UnstableAr { max_root_modulus: f64 },

    /// A scalar parameter is outside its valid range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A linear system could not be solved.
    #[error("singular linear system: {0}")]
    SingularSystem(String),

    /// The covariance quadratic form fell below its numerical floor while the
    /// detector was configured to treat that as an error.
    #[error("degenerate covariance denominator")]
    DegenerateDenominator,

    /// The quadratic form v^H Gamma v came out nonpositive.
    #[error("nonpositive covariance quadratic form")]
    NonPositiveQuadraticForm,

    /// Preset name not recognized.
    #[error("unknown preset: {0:?}")]
    UnknownPreset(String),

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// CSV serialization failure.
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
