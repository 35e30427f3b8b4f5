//! Orientation-preserving homeomorphisms of the unit circle, stored as lifted angles.

use crate::error::{Error, Result};
use crate::moebius::MoebiusTransform;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use std::io::{Read, Write};

/// Samples `θ_k = 2πk/n ↦ ψ_k` of a degree-one circle homeomorphism.
///
/// The lifted angles are strictly increasing with `ψ_{n-1} < ψ_0 + 2π`;
/// evaluation between samples uses monotone piecewise-cubic Hermite interpolation.
#[derive(Debug, Clone)]
pub struct CircleHomeo {
    psi: Vec<f64>,
    slopes: Vec<f64>,
    points: Vec<Complex64>,
}

impl PartialEq for CircleHomeo {
    fn eq(&self, other: &Self) -> bool {
        self.psi == other.psi
    }
}

#[derive(Serialize, Deserialize)]
struct Row {
    theta: f64,
    psi: f64,
}

impl CircleHomeo {
    pub fn new(psi: Vec<f64>) -> Result<Self> {
        let n = psi.len();
        if n < 8 {
            return Err(Error::invalid(format!("need at least 8 samples, got {n}")));
        }
        if psi.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("non-finite angle"));
        }
        for k in 0..n {
            let next = if k + 1 == n { psi[0] + TAU } else { psi[k + 1] };
            if !(next > psi[k]) {
                return Err(Error::invalid(format!("angles not strictly increasing at sample {k}")));
            }
        }
        let slopes = monotone_slopes(&psi);
        let points = psi.iter().map(|&p| Complex64::from_polar(1.0, p)).collect();
        Ok(CircleHomeo { psi, slopes, points })
    }

    /// Samples `f(e^{iθ_k})`, which must lie on or near the circle, and lifts their arguments.
    pub fn from_fn<F: FnMut(Complex64) -> Complex64>(n: usize, mut f: F) -> Result<Self> {
        let mut psi = Vec::with_capacity(n);
        let mut prev = 0.0;
        for k in 0..n {
            let theta = TAU * k as f64 / n as f64;
            let a = f(Complex64::from_polar(1.0, theta)).arg();
            let lifted = if k == 0 { a } else { prev + wrap(a - prev) };
            psi.push(lifted);
            prev = lifted;
        }
        Self::new(psi)
    }

    pub fn identity(n: usize) -> Self {
        Self::new((0..n).map(|k| TAU * k as f64 / n as f64).collect()).expect("identity samples")
    }

    /// Boundary trace of a Möbius automorphism of the disk.
    pub fn from_moebius(h: &MoebiusTransform, n: usize) -> Result<Self> {
        Self::from_fn(n, |z| h.apply_finite(z).unwrap_or(z))
    }

    pub fn len(&self) -> usize {
        self.psi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi.is_empty()
    }

    pub fn psi(&self) -> &[f64] {
        &self.psi
    }

    pub fn theta(&self, k: usize) -> f64 {
        TAU * k as f64 / self.len() as f64
    }

    /// `e^{iψ_k}`.
    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    /// Lifted image angle of an arbitrary `θ`, consistent with `ψ(θ + 2π) = ψ(θ) + 2π`.
    pub fn eval_angle(&self, theta: f64) -> f64 {
        let n = self.len();
        let dt = TAU / n as f64;
        let turns = (theta / TAU).floor();
        let t = (theta - turns * TAU) / dt;
        let k = (t.floor() as usize).min(n - 1);
        let s = t - k as f64;
        let (p0, p1) = if k + 1 == n { (self.psi[k], self.psi[0] + TAU) } else { (self.psi[k], self.psi[k + 1]) };
        let (m0, m1) = (self.slopes[k], self.slopes[(k + 1) % n]);
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        h00 * p0 + h10 * dt * m0 + h01 * p1 + h11 * dt * m1 + turns * TAU
    }

    /// The image of a point of the circle (its modulus is ignored).
    pub fn eval(&self, zeta: Complex64) -> Complex64 {
        Complex64::from_polar(1.0, self.eval_angle(zeta.arg()))
    }

    /// Samples of `h ∘ φ ∘ g` for disk automorphisms `g`, `h`.
    pub fn conjugated(&self, g: &MoebiusTransform, h: &MoebiusTransform) -> Result<Self> {
        Self::from_fn(self.len(), |z| {
            let gz = g.apply_finite(z).unwrap_or(z);
            let v = self.eval(gz);
            h.apply_finite(v).unwrap_or(v)
        })
    }

    /// Post-composition with the disk automorphism sending the images of `1, i, -1` back to `1, i, -1`.
    pub fn renormalized(&self) -> Result<Self> {
        let m = normalizer(self.eval(ONE), self.eval(I), self.eval(-ONE))?;
        Self::from_fn(self.len(), |z| {
            let v = self.eval(z);
            m.apply_finite(v).unwrap_or(v)
        })
    }

    /// Sup over samples of the angular distance between two maps on the same sample count.
    pub fn sup_angular_distance(&self, other: &CircleHomeo) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::invalid("sample counts differ"));
        }
        Ok(self.psi.iter().zip(&other.psi).map(|(a, b)| wrap(a - b).abs()).fold(0.0, f64::max))
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for (k, &psi) in self.psi.iter().enumerate() {
            w.serialize(Row { theta: self.theta(k), psi })?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads `(θ, ψ)` rows; `θ` must be the uniform grid `2πk/n`.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let rows: Vec<Row> = csv::Reader::from_reader(reader).deserialize().collect::<std::result::Result<_, _>>()?;
        let n = rows.len();
        for (k, r) in rows.iter().enumerate() {
            if (r.theta - TAU * k as f64 / n as f64).abs() > 1e-9 {
                return Err(Error::Parse(format!("row {k}: θ is not on the uniform grid")));
            }
        }
        Self::new(rows.into_iter().map(|r| r.psi).collect())
    }
}

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// The Möbius map sending `a, b, c` to `1, i, -1`.
pub fn normalizer(a: Complex64, b: Complex64, c: Complex64) -> Result<MoebiusTransform> {
    let s = MoebiusTransform::from_triple(a.into(), b.into(), c.into())?;
    let t = MoebiusTransform::from_triple(ONE.into(), I.into(), (-ONE).into())?;
    Ok(t.inverse().compose(&s))
}

/// Wraps an angle difference into `(-π, π]`.
pub fn wrap(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Node derivatives of the lifted angle: fourth-order centered differences of
/// the periodic part, then the Fritsch–Carlson monotonicity limiter.
fn monotone_slopes(psi: &[f64]) -> Vec<f64> {
    let n = psi.len();
    let dt = TAU / n as f64;
    let at = |k: isize| -> f64 {
        let m = k.rem_euclid(n as isize) as usize;
        let turns = k.div_euclid(n as isize) as f64;
        psi[m] + turns * TAU
    };
    let mut m: Vec<f64> = (0..n as isize)
        .map(|k| (-at(k + 2) + 8.0 * at(k + 1) - 8.0 * at(k - 1) + at(k - 2)) / (12.0 * dt))
        .collect();
    for v in m.iter_mut() {
        *v = v.max(0.0);
    }
    for k in 0..n {
        let secant = (at(k as isize + 1) - at(k as isize)) / dt;
        let (a, b) = (m[k] / secant, m[(k + 1) % n] / secant);
        let r = a.hypot(b);
        if r > 3.0 {
            let tau = 3.0 / r;
            m[k] = tau * a * secant;
            m[(k + 1) % n] = tau * b * secant;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_monotone_samples() {
        let mut psi: Vec<f64> = (0..16).map(|k| TAU * k as f64 / 16.0).collect();
        psi.swap(3, 4);
        assert!(CircleHomeo::new(psi).is_err());
        let psi: Vec<f64> = (0..16).map(|k| 2.0 * TAU * k as f64 / 16.0).collect();
        assert!(CircleHomeo::new(psi).is_err(), "degree two");
    }

    #[test]
    fn interpolates_moebius_traces() {
        let h = MoebiusTransform::disk_automorphism(0.4, Complex64::new(0.3, -0.2)).unwrap();
        let phi = CircleHomeo::from_moebius(&h, 1024).unwrap();
        for t in 0..97 {
            let theta = -3.0 + 0.13 * t as f64;
            let z = Complex64::from_polar(1.0, theta);
            assert!((phi.eval(z) - h.apply_finite(z).unwrap()).norm() < 1e-9);
        }
        let id = CircleHomeo::identity(64);
        assert!((id.eval_angle(7.5) - 7.5).abs() < 1e-12);
    }

    #[test]
    fn renormalization_fixes_three_points() {
        let h = MoebiusTransform::disk_automorphism(1.0, Complex64::new(-0.5, 0.1)).unwrap();
        let phi = CircleHomeo::from_moebius(&h, 512).unwrap().renormalized().unwrap();
        assert!(phi.sup_angular_distance(&CircleHomeo::identity(512)).unwrap() < 1e-9);
    }

    #[test]
    fn csv_round_trip() {
        let h = MoebiusTransform::disk_automorphism(0.2, Complex64::new(0.1, 0.1)).unwrap();
        let phi = CircleHomeo::from_moebius(&h, 32).unwrap();
        let mut buf = Vec::new();
        phi.write_csv(&mut buf).unwrap();
        let back = CircleHomeo::read_csv(buf.as_slice()).unwrap();
        assert!(back.sup_angular_distance(&phi).unwrap() < 1e-15);
    }
}
