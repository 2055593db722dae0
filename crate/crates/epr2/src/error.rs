//! Error type shared across the crate.

use thiserror::Error;

/// Failure modes of constructors and numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Angle outside the accepted range.
    #[error("angle {value} outside [{min}, {max}]")]
    AngleOutOfRange { value: f64, min: f64, max: f64 },
    /// Vector is not unit length within tolerance.
    #[error("vector ({x}, {y}, {z}) is not unit length")]
    NotUnitVector { x: f64, y: f64, z: f64 },
    /// Value must be a finite probability-like quantity.
    #[error("value {value} outside [0, 1]")]
    NotAProbability { value: f64 },
    /// Product state: the nonlocal part of the decomposition is undefined.
    #[error("theta = 0 leaves the nonlocal part undefined (local weight is 1)")]
    DegenerateTheta,
    /// Matrix is not unitary within tolerance.
    #[error("matrix deviates from unitarity by {deviation:e}")]
    NotUnitary { deviation: f64 },
    /// Configuration or argument rejected before any computation ran.
    #[error("invalid argument: {reason}")]
    InvalidArgument { reason: &'static str },
}

impl Error {
    pub(crate) fn invalid(reason: &'static str) -> Self {
        Error::InvalidArgument { reason }
    }
}
