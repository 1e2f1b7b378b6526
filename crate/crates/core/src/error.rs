//! Error types shared across the solver and its monitors.

use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum CoreError {
    /// Two fields on incompatible grids were combined.
    #[error("incompatible grids: {0}")]
    GridMismatch(String),

    /// A configuration value violates its documented constraint.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A non-finite value appeared in a prognostic field.
    #[error("solution blew up at t = {time:.6e} ({field})")]
    BlowUp { time: f64, field: &'static str },

    /// A bound formula referenced an initial norm that was not supplied.
    #[error("missing initial norm `{0}`")]
    MissingNorm(String),

    /// A certificate name does not match any known bound.
    #[error("unknown bound name `{0}`")]
    UnknownBound(String),

    /// Monitor samples must be strictly increasing in time.
    #[error("monitor series must be time-ordered")]
    UnorderedSeries,
}

pub type Result<T> = std::result::Result<T, CoreError>;
