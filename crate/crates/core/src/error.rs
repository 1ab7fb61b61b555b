use thiserror::Error;

use crate::numeric::{QuadratureError, RootError};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Root(#[from] RootError),
    #[error("no bracket for the segment constant: {0}")]
    NoBracket(String),
    #[error("Newton iteration diverged after {iterations} iterations (residual {residual:e})")]
    NewtonDiverged { iterations: usize, residual: f64 },
    #[error("peak positions must be strictly increasing: {0:?}")]
    OrderingViolation(Vec<f64>),
    #[error("solver failure at t = {t}: {reason}")]
    SolverFailure { t: f64, reason: String },
    #[error("linear fit residual {residual:e} exceeds {threshold:e}; run longer")]
    FitNotLinear { residual: f64, threshold: f64 },
    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    /// Errors caused by bad input rather than by a solver.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Domain(_) | Error::OrderingViolation(_) | Error::Invalid(_))
    }
}
