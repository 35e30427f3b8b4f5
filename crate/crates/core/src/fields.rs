//! Declarative Beltrami coefficients: JSON specs and seeded random smooth fields.

use crate::beltrami::{BeltramiField, Disk};
use crate::error::{Error, Result};
use crate::grid::{ComplexGrid, GridField};
use crate::moebius::MoebiusTransform;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// A smooth compactly supported bump `a·exp(1 - 1/(1 - |z-c|²/r²))`, peak `|a|` at `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: Complex64,
    pub radius: f64,
    pub amplitude: Complex64,
}

impl Bump {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let s = (z - self.center).norm_sqr() / (self.radius * self.radius);
        if s >= 1.0 {
            Complex64::new(0.0, 0.0)
        } else {
            self.amplitude * (1.0 - 1.0 / (1.0 - s)).exp()
        }
    }

    /// The pushforward `g_*` of this bump under an affine `g(z) = az + b`, which is again a bump.
    pub fn pushed(&self, g: &MoebiusTransform) -> Result<Bump> {
        if !g.is_affine() {
            return Err(Error::invalid("bumps push forward only under affine maps"));
        }
        let a = g.derivative(self.center)?;
        let center = g.apply_finite(self.center).ok_or_else(|| Error::invalid("affine map has no pole"))?;
        Ok(Bump { center, radius: a.norm() * self.radius, amplitude: self.amplitude * a / a.conj() })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FieldSpec {
    Zero,
    /// Constant value on `|z - center| < radius`.
    Constant { value: Complex64, center: Complex64, radius: f64 },
    Bumps { bumps: Vec<Bump> },
    /// Coefficient of `z|z|^{K-1}` on `|z| < radius`.
    RadialStretch { dilatation: f64, radius: f64 },
    /// `count` random bumps inside `region`, scaled to sup norm `norm` on the grid.
    Random { seed: u64, count: usize, region: Disk, norm: f64 },
}

impl FieldSpec {
    pub fn build(&self, grid: ComplexGrid) -> Result<BeltramiField> {
        let zero = Complex64::new(0.0, 0.0);
        match self {
            FieldSpec::Zero => Ok(BeltramiField::zero(grid)),
            FieldSpec::Constant { value, center, radius } => {
                let reach = (center.norm() + radius).min(grid.support_radius());
                BeltramiField::from_fn(grid, reach, |z| if (z - center).norm() < *radius { *value } else { zero })
            }
            FieldSpec::Bumps { bumps } => bumps_field(grid, bumps),
            FieldSpec::RadialStretch { dilatation, radius } => {
                if *dilatation < 1.0 {
                    return Err(Error::invalid("dilatation must be at least 1"));
                }
                let k = (dilatation - 1.0) / (dilatation + 1.0);
                BeltramiField::from_fn(grid, radius.min(grid.support_radius()), |z| {
                    if z.norm() < *radius && z.norm() > 0.0 {
                        k * z / z.conj()
                    } else {
                        zero
                    }
                })
            }
            FieldSpec::Random { seed, count, region, norm } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                random_field(grid, &mut rng, *count, region, *norm)
            }
        }
    }
}

fn bumps_field(grid: ComplexGrid, bumps: &[Bump]) -> Result<BeltramiField> {
    let reach = bumps.iter().map(|b| b.center.norm() + b.radius).fold(0.0, f64::max);
    if reach > grid.support_radius() {
        return Err(Error::domain(format!("bumps reach |z| = {reach:.3}, beyond L/2 = {}", grid.support_radius())));
    }
    BeltramiField::from_fn(grid, reach, |z| bumps.iter().map(|b| b.eval(z)).sum())
}

/// `count` random bumps with centers and radii keeping them inside `region`.
pub fn random_bumps<R: Rng>(rng: &mut R, count: usize, region: &Disk) -> Vec<Bump> {
    (0..count)
        .map(|_| {
            let rho = region.r * rng.gen_range(0.0f64..0.7).sqrt();
            let center = region.center() + Complex64::from_polar(rho, rng.gen_range(0.0..TAU));
            let radius = (region.r - rho) * rng.gen_range(0.5..1.0);
            let amplitude = Complex64::from_polar(rng.gen_range(0.3..1.0), rng.gen_range(0.0..TAU));
            Bump { center, radius, amplitude }
        })
        .collect()
}

/// Random bumps inside `region` rescaled so that the sup norm over the grid nodes is exactly `norm`.
pub fn random_field<R: Rng>(
    grid: ComplexGrid,
    rng: &mut R,
    count: usize,
    region: &Disk,
    norm: f64,
) -> Result<BeltramiField> {
    scaled_bumps_field(grid, random_bumps(rng, count.max(1), region), norm)
}

/// Rescales the amplitudes so that the sup norm of the sum over the grid nodes is exactly `norm`.
pub fn scaled_bumps_field(grid: ComplexGrid, mut bumps: Vec<Bump>, norm: f64) -> Result<BeltramiField> {
    if !(0.0..1.0).contains(&norm) {
        return Err(Error::invalid(format!("target norm {norm} outside [0, 1)")));
    }
    let raw = GridField::from_fn(grid, |z| bumps.iter().map(|b| b.eval(z)).sum());
    let sup = raw.max_abs();
    if sup == 0.0 {
        return Err(Error::invalid("bumps missed every grid node"));
    }
    for b in bumps.iter_mut() {
        b.amplitude *= norm / sup;
    }
    bumps_field(grid, &bumps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_fields_hit_the_target_norm() {
        let grid = ComplexGrid::new(4.0, 128).unwrap();
        let spec = FieldSpec::Random { seed: 7, count: 3, region: Disk::new(Complex64::new(0.0, 0.0), 0.9), norm: 0.5 };
        let a = spec.build(grid).unwrap();
        assert!((a.sup_norm() - 0.5).abs() < 1e-12);
        assert!(a.support_radius() <= 0.9);
        assert_eq!(a.values(), spec.build(grid).unwrap().values());
    }

    #[test]
    fn affine_pushforward_of_bumps() {
        let b = Bump { center: Complex64::new(0.5, 0.2), radius: 0.3, amplitude: Complex64::new(0.2, 0.1) };
        let g = MoebiusTransform::affine(Complex64::new(0.0, 2.0), Complex64::new(1.0, 0.0)).unwrap();
        let p = b.pushed(&g).unwrap();
        for z in [Complex64::new(0.4, 0.3), Complex64::new(0.6, 0.1)] {
            let a = Complex64::new(0.0, 2.0);
            assert!((p.eval(g.apply_finite(z).unwrap()) - b.eval(z) * a / a.conj()).norm() < 1e-15);
        }
    }

    #[test]
    fn specs_parse_from_json() {
        let spec: FieldSpec =
            serde_json::from_str(r#"{"kind": "radial-stretch", "dilatation": 2.0, "radius": 1.0}"#).unwrap();
        let mu = spec.build(ComplexGrid::new(4.0, 64).unwrap()).unwrap();
        assert!((mu.dilatation() - 2.0).abs() < 1e-12);
        let zero: FieldSpec = serde_json::from_str(r#"{"kind": "zero"}"#).unwrap();
        assert_eq!(zero, FieldSpec::Zero);
    }
}
