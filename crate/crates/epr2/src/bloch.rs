//! Measurement directions and dichotomic outcomes.

use crate::error::Error;
use crate::math;

const UNIT_TOL: f64 = 1e-12;

/// Unit vector on the Bloch sphere.
///
/// Constructors enforce `x^2 + y^2 + z^2 = 1` within `1e-12`; the fields
/// are read-only afterwards so the invariant cannot be broken.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BlochVector {
    x: f64,
    y: f64,
    z: f64,
}

impl BlochVector {
    /// Checked constructor. Rejects non-finite or non-unit input.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self, Error> {
        let n2 = x * x + y * y + z * z;
        if !n2.is_finite() || math::abs(n2 - 1.0) > UNIT_TOL {
            return Err(Error::NotUnitVector { x, y, z });
        }
        Ok(Self { x, y, z })
    }

    /// Rescales an arbitrary nonzero vector onto the sphere.
    pub fn normalized(x: f64, y: f64, z: f64) -> Result<Self, Error> {
        let n = math::sqrt(x * x + y * y + z * z);
        if !n.is_finite() || n < 1e-300 {
            return Err(Error::NotUnitVector { x, y, z });
        }
        Ok(Self {
            x: x / n,
            y: y / n,
            z: z / n,
        })
    }

    /// Direction with polar angle `theta` from +z and azimuth `phi`.
    pub fn from_polar(theta: f64, phi: f64) -> Self {
        let st = math::sin(theta);
        Self {
            x: st * math::cos(phi),
            y: st * math::sin(phi),
            z: math::cos(theta),
        }
    }

    pub fn x_hat() -> Self {
        Self { x: 1.0, y: 0.0, z: 0.0 }
    }

    pub fn y_hat() -> Self {
        Self { x: 0.0, y: 1.0, z: 0.0 }
    }

    pub fn z_hat() -> Self {
        Self { x: 0.0, y: 0.0, z: 1.0 }
    }

    #[inline]
    pub fn x(&self) -> f64 {
        self.x
    }

    #[inline]
    pub fn y(&self) -> f64 {
        self.y
    }

    #[inline]
    pub fn z(&self) -> f64 {
        self.z
    }

    #[inline]
    pub fn neg(&self) -> Self {
        Self {
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }

    #[inline]
    pub fn dot(&self, other: &Self) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }
}

/// Dichotomic measurement outcome, valued +1 or -1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub const ALL: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    #[inline]
    pub fn value(self) -> f64 {
        match self {
            Outcome::Plus => 1.0,
            Outcome::Minus => -1.0,
        }
    }

    /// Maps a real number to the outcome of its sign, with `sign(0) = +1`.
    #[inline]
    pub fn from_sign(v: f64) -> Self {
        if v < 0.0 {
            Outcome::Minus
        } else {
            Outcome::Plus
        }
    }
}
