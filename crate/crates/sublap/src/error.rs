//! Crate-wide error type.

/// Errors produced by the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Point/model dimensions do not agree.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A gauge-singular quantity was requested at the pole.
    #[error("evaluation at the gauge pole: {0}")]
    Pole(String),

    /// A parameter is outside its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An iterative solver exhausted its budget before reaching tolerance.
    #[error("solver did not converge: {0}")]
    NoConvergence(String),

    /// A surface quadrature could not be built or refined as requested.
    #[error("quadrature failure: {0}")]
    Quadrature(String),

    /// A domain is malformed or unsupported for the requested operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Root finding (tangency system, characteristic refinement, …) failed.
    #[error("root finding failed: {0}")]
    RootFind(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
