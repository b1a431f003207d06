//! Crate-wide error type and result alias.

use std::path::PathBuf;

/// Errors produced by matrix algebra, estimation, distances, experiment
/// harnesses, and file handling.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A matrix (or matrix pencil) required to be positive definite is not.
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    /// Operands have incompatible dimensions.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A scalar argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    DomainError(String),

    /// An operation that needs at least one observation received none.
    #[error("empty sample")]
    EmptySample,

    /// The likelihood score has no root inside the search bracket
    /// (degenerate sample with zero log-determinant dispersion).
    #[error("no root in bracket: sample log-determinant dispersion is degenerate")]
    NoRootInBracket,

    /// An iterative routine failed to converge.
    #[error("numerical failure: {0}")]
    NumericalFailure(&'static str),

    /// The chi-square contrast integral diverges for these parameters
    /// (`2 L_j - L_i <= p - 1` or the associated matrix pencil is not
    /// positive definite).
    #[error("chi-square distance diverges for these parameters")]
    ChiSquareDiverges,

    /// Adaptive quadrature failed to reach the requested tolerance.
    #[error("quadrature failed to converge")]
    QuadratureFailure,

    /// A file or configuration could not be parsed.
    #[error("parse error: {0}")]
    ParseError(String),

    /// Parsed content failed semantic validation.
    #[error("validation error: {0}")]
    ValidationError(String),

    /// Refusing to overwrite an existing file without the explicit flag.
    #[error("file already exists: {0} (pass the overwrite flag to replace it)")]
    FileExists(PathBuf),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable code naming the variant, used by the CLI's
    /// stderr format.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NotPositiveDefinite => "NotPositiveDefinite",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::DomainError(_) => "DomainError",
            Error::EmptySample => "EmptySample",
            Error::NoRootInBracket => "NoRootInBracket",
            Error::NumericalFailure(_) => "NumericalFailure",
            Error::ChiSquareDiverges => "ChiSquareDiverges",
            Error::QuadratureFailure => "QuadratureFailure",
            Error::ParseError(_) => "ParseError",
            Error::ValidationError(_) => "ValidationError",
            Error::FileExists(_) => "FileExists",
            Error::Io(_) => "Io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
