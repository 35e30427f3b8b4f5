//! Fractional-linear transformations of the Riemann sphere.

use crate::error::{Error, Result};
use crate::sphere::SpherePoint;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `z ↦ (az + b)/(cz + d)`, stored with `ad - bc = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoebiusTransform {
    a: Complex64,
    b: Complex64,
    c: Complex64,
    d: Complex64,
}

impl MoebiusTransform {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        let det = a * d - b * c;
        let scale = [a, b, c, d].iter().map(|v| v.norm_sqr()).sum::<f64>();
        if !(det.norm() > 1e-14 * scale) || !det.is_finite() {
            return Err(Error::invalid("degenerate matrix: ad - bc = 0"));
        }
        let s = det.sqrt();
        Ok(MoebiusTransform { a: a / s, b: b / s, c: c / s, d: d / s })
    }

    pub fn identity() -> Self {
        MoebiusTransform { a: ONE, b: ZERO, c: ZERO, d: ONE }
    }

    /// `z ↦ az + b`.
    pub fn affine(a: Complex64, b: Complex64) -> Result<Self> {
        Self::new(a, b, ZERO, ONE)
    }

    /// `z ↦ e^{iθ}(z - p)/(1 - conj(p) z)`, an automorphism of the unit disk for `|p| < 1`.
    pub fn disk_automorphism(theta: f64, p: Complex64) -> Result<Self> {
        if p.norm() >= 1.0 {
            return Err(Error::invalid(format!("|p| = {} must be < 1", p.norm())));
        }
        let r = Complex64::from_polar(1.0, theta);
        Self::new(r, -r * p, -p.conj(), ONE)
    }

    /// The unique transformation sending `a, b, c` to `0, 1, ∞`.
    pub fn from_triple(a: SpherePoint, b: SpherePoint, c: SpherePoint) -> Result<Self> {
        let distinct = a.chordal(b) > 1e-14 && b.chordal(c) > 1e-14 && a.chordal(c) > 1e-14;
        if !distinct {
            return Err(Error::invalid(format!("coincident points in triple ({a}, {b}, {c})")));
        }
        use SpherePoint::{Finite as F, Infinity as I};
        match (a, b, c) {
            (I, F(b), F(c)) => Self::new(ZERO, b - c, ONE, -c),
            (F(a), I, F(c)) => Self::new(ONE, -a, ONE, -c),
            (F(a), F(b), I) => Self::new(ONE, -a, ZERO, b - a),
            (F(a), F(b), F(c)) => Self::new(b - c, -a * (b - c), b - a, -c * (b - a)),
            _ => unreachable!("distinct points include at most one infinity"),
        }
    }

    /// The post-composition normalizer sending the images of `0, 1, ∞` back to `0, 1, ∞`.
    pub fn normalizer_fixing_triple(w0: SpherePoint, w1: SpherePoint, winf: SpherePoint) -> Result<Self> {
        Self::from_triple(w0, w1, winf)
    }

    pub fn coefficients(&self) -> [Complex64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn is_affine(&self) -> bool {
        self.c == ZERO
    }

    pub fn apply(&self, z: SpherePoint) -> SpherePoint {
        match z {
            SpherePoint::Infinity => {
                if self.c == ZERO {
                    SpherePoint::Infinity
                } else {
                    SpherePoint::Finite(self.a / self.c)
                }
            }
            SpherePoint::Finite(z) => {
                let den = self.c * z + self.d;
                if den == ZERO {
                    SpherePoint::Infinity
                } else {
                    SpherePoint::Finite((self.a * z + self.b) / den)
                }
            }
        }
    }

    /// Finite-point shorthand; returns `None` at the pole.
    pub fn apply_finite(&self, z: Complex64) -> Option<Complex64> {
        self.apply(SpherePoint::Finite(z)).finite()
    }

    pub fn pole(&self) -> SpherePoint {
        if self.c == ZERO {
            SpherePoint::Infinity
        } else {
            SpherePoint::Finite(-self.d / self.c)
        }
    }

    pub fn derivative(&self, z: Complex64) -> Result<Complex64> {
        let den = self.c * z + self.d;
        if den.norm() < 1e-300 {
            return Err(Error::domain(format!("derivative requested at the pole {z}")));
        }
        Ok(ONE / (den * den))
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &MoebiusTransform) -> MoebiusTransform {
        let (p, q) = (self, other);
        MoebiusTransform {
            a: p.a * q.a + p.b * q.c,
            b: p.a * q.b + p.b * q.d,
            c: p.c * q.a + p.d * q.c,
            d: p.c * q.b + p.d * q.d,
        }
    }

    pub fn inverse(&self) -> MoebiusTransform {
        MoebiusTransform { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    /// Image of the open disk `D(center, radius)`, which must not contain the pole.
    pub fn map_disk(&self, center: Complex64, radius: f64) -> Result<(Complex64, f64)> {
        if let SpherePoint::Finite(p) = self.pole() {
            if (p - center).norm() <= radius * (1.0 + 1e-12) {
                return Err(Error::domain("disk image is not a bounded disk (pole inside)"));
            }
        }
        let pts: Vec<Complex64> = (0..3)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
                self.apply_finite(center + Complex64::from_polar(radius, t)).expect("pole outside disk")
            })
            .collect();
        let c = circumcenter(pts[0], pts[1], pts[2]);
        Ok((c, (pts[0] - c).norm()))
    }
}

fn circumcenter(a: Complex64, b: Complex64, c: Complex64) -> Complex64 {
    let (b, c) = (b - a, c - a);
    let d = 2.0 * (b.re * c.im - b.im * c.re);
    let ux = (c.im * b.norm_sqr() - b.im * c.norm_sqr()) / d;
    let uy = (b.re * c.norm_sqr() - c.re * b.norm_sqr()) / d;
    a + Complex64::new(ux, uy)
}
