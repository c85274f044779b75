//! Crate-wide error type.

use thiserror::Error;

/// Errors reported by the geometry, slicing, integration and deployment APIs.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A scalar argument fell outside its admissible interval.
    #[error("{name} = {value} is outside [{min}, {max}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    /// A length-like parameter (radius, cube side, sample count ...) must be positive.
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    /// Coverage level outside the supported 1..=6 range for the six-circle slice.
    #[error("coverage level k = {k} is outside 1..=6")]
    InvalidCoverageLevel { k: u32 },

    /// Field-of-interest description could not be used.
    #[error("invalid field of interest: {0}")]
    InvalidFoi(String),

    /// The adaptive quadrature ran out of subdivisions before reaching the
    /// requested tolerance. Carries the best estimate obtained so far.
    #[error(
        "quadrature did not reach tolerance {tolerance} within {max_subdivisions} subdivisions \
         (best estimate {best} with error {estimated_error})"
    )]
    ToleranceNotReached {
        tolerance: f64,
        max_subdivisions: u32,
        best: f64,
        estimated_error: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn out_of_range(name: &'static str, value: f64, min: f64, max: f64) -> Self {
        Error::OutOfRange {
            name,
            value,
            min,
            max,
        }
    }

    pub(crate) fn non_positive(name: &'static str, value: f64) -> Self {
        Error::NonPositive { name, value }
    }
}
