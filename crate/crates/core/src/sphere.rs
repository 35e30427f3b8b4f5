//! Points of the Riemann sphere and the chordal metric.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;

/// A point of the Riemann sphere: a finite complex number or the point at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpherePoint {
    Finite(Complex64),
    #[serde(with = "infinity_tag")]
    Infinity,
}

mod infinity_tag {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str("inf")
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(), D::Error> {
        let s = String::deserialize(d)?;
        if s == "inf" || s == "infinity" {
            Ok(())
        } else {
            Err(serde::de::Error::custom(format!("expected \"inf\", got {s:?}")))
        }
    }
}

pub use SpherePoint::Infinity;

impl SpherePoint {
    pub fn new(re: f64, im: f64) -> Self {
        SpherePoint::Finite(Complex64::new(re, im))
    }

    pub fn finite(self) -> Option<Complex64> {
        match self {
            SpherePoint::Finite(z) => Some(z),
            SpherePoint::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, SpherePoint::Infinity)
    }

    /// Chordal distance on the unit-diameter sphere, bounded by 1.
    pub fn chordal(self, other: SpherePoint) -> f64 {
        match (self, other) {
            (SpherePoint::Infinity, SpherePoint::Infinity) => 0.0,
            (SpherePoint::Finite(z), SpherePoint::Infinity)
            | (SpherePoint::Infinity, SpherePoint::Finite(z)) => 1.0 / (1.0 + z.norm_sqr()).sqrt(),
            (SpherePoint::Finite(z), SpherePoint::Finite(w)) => {
                (z - w).norm() / ((1.0 + z.norm_sqr()).sqrt() * (1.0 + w.norm_sqr()).sqrt())
            }
        }
    }

    /// The antipodal-free inversion z -> 1/z, with 0 <-> infinity.
    pub fn recip(self) -> SpherePoint {
        match self {
            SpherePoint::Infinity => SpherePoint::Finite(Complex64::new(0.0, 0.0)),
            SpherePoint::Finite(z) if z == Complex64::new(0.0, 0.0) => SpherePoint::Infinity,
            SpherePoint::Finite(z) => SpherePoint::Finite(z.inv()),
        }
    }
}

impl From<Complex64> for SpherePoint {
    fn from(z: Complex64) -> Self {
        SpherePoint::Finite(z)
    }
}

impl fmt::Display for SpherePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpherePoint::Finite(z) => write!(f, "{}{:+}i", z.re, z.im),
            SpherePoint::Infinity => write!(f, "inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chordal_distance_to_infinity() {
        assert_eq!(Infinity.chordal(Infinity), 0.0);
        assert!((SpherePoint::new(0.0, 0.0).chordal(Infinity) - 1.0).abs() < 1e-15);
        let big = SpherePoint::new(1e8, 0.0);
        assert!(big.chordal(Infinity) < 1e-7);
    }

    #[test]
    fn chordal_is_symmetric() {
        let a = SpherePoint::new(1.0, 2.0);
        let b = SpherePoint::new(-0.5, 0.25);
        assert!((a.chordal(b) - b.chordal(a)).abs() < 1e-16);
    }

    #[test]
    fn serde_round_trip() {
        let pts = vec![SpherePoint::new(1.5, -2.0), Infinity];
        let s = serde_json::to_string(&pts).unwrap();
        let back: Vec<SpherePoint> = serde_json::from_str(&s).unwrap();
        assert_eq!(pts, back);
    }
}
