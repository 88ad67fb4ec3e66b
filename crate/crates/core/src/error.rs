use thiserror::Error;

use crate::geometry::{Config, PhasePoint};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A point or vector is off its constraint set by more than the allowed residual.
    #[error("constraint violation: {what} (residual {residual:e})")]
    ConstraintViolation { what: &'static str, residual: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Mixing spaces, unsupported field kinds, grid too coarse, etc.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("integration failed at t = {time}: {message}")]
    Integration {
        message: String,
        time: f64,
        last_good: Box<PhasePoint>,
    },

    #[error("precondition failed: {0}")]
    Precondition(String),

    /// The shift function has a critical point outside the region it must avoid.
    #[error("construction failed at {point:?}: {message}")]
    Construction { message: String, point: Box<Config> },

    /// Budget exhausted without a positive margin. Says nothing about impossibility.
    #[error("no displacing function found within budget (best margin {best_margin:e})")]
    SearchFailure { best_margin: f64 },

    #[error("inconsistent fiber classification: {0}")]
    Inconsistency(String),

    #[error("precondition cannot be verified at this resolution: {0}")]
    Unverifiable(String),
}
