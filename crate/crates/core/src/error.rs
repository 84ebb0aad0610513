//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the domain of the operation (nonpositive state
    /// entries, non-finite potential values, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A mean function hit a vanishing denominator away from the diagonal.
    #[error("degenerate mean: {0}")]
    DegenerateMean(String),

    /// Invalid construction parameters (grid size, exponents, config values).
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A built operator violated one of its structural invariants.
    #[error("operator assembly failed: {0}")]
    Assembly(String),

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    /// Adaptive time stepping underflowed; carries the last accepted state.
    #[error("integration failed at t = {t}: {reason}")]
    IntegrationFailure {
        t: f64,
        reason: String,
        last_state: Vec<f64>,
    },

    /// Neither shooting nor direct action minimization converged.
    #[error(
        "geodesic solve failed: {reason} \
         (shooting residual {shooting_residual:.3e}, \
         minimization residual {minimization_residual:.3e})"
    )]
    GeodesicFailure {
        reason: String,
        shooting_residual: f64,
        minimization_residual: f64,
    },

    /// The operation was called outside the regime it is defined for.
    #[error("out of scope: {0}")]
    Scope(String),
}

pub type Result<T> = std::result::Result<T, Error>;
