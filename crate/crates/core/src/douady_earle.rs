//! Boundary traces of disk maps, the Douady–Earle barycentric extension and the section σ.

use crate::beltrami::BeltramiField;
use crate::circle::{normalizer, CircleHomeo};
use crate::error::{Error, Result};
use crate::grid::{ComplexGrid, GridField};
use crate::moebius::MoebiusTransform;
use crate::solver::{solve_with, QuasiconformalMap, SolverOptions};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Default number of boundary samples.
pub const BOUNDARY_SAMPLES: usize = 1024;
const REFINE_LEVELS: usize = 7;

/// Evaluates `ex(φ)` at many points, refining the boundary quadrature near `S¹`.
pub struct Extender<'a> {
    phi: &'a CircleHomeo,
    refined: [OnceLock<Vec<Complex64>>; REFINE_LEVELS],
}

impl<'a> Extender<'a> {
    pub fn new(phi: &'a CircleHomeo) -> Self {
        Extender { phi, refined: Default::default() }
    }

    /// Boundary samples `(ζ_k, φ(ζ_k))` with spacing at most `(1 - |z|)/6`.
    fn nodes(&self, z: Complex64) -> (usize, &[Complex64]) {
        let n = self.phi.len();
        let gap = 1.0 - z.norm();
        let mut level = 0;
        while level + 1 < REFINE_LEVELS && TAU / ((n << level) as f64) > gap / 6.0 {
            level += 1;
        }
        if level == 0 {
            return (n, self.phi.points());
        }
        let m = n << level;
        let pts = self.refined[level].get_or_init(|| {
            (0..m).map(|k| Complex64::from_polar(1.0, self.phi.eval_angle(TAU * k as f64 / m as f64))).collect()
        });
        (m, pts)
    }

    /// The conformal barycenter `w` of `φ_*(P(z, ·) dθ/2π)`.
    pub fn extend(&self, z: Complex64) -> Result<Complex64> {
        if !(z.norm() < 1.0) {
            return Err(Error::domain(format!("barycentric extension needs |z| < 1, got {z}")));
        }
        let (m, pts) = self.nodes(z);
        let scale = (1.0 - z.norm_sqr()) / m as f64;
        let weights: Vec<f64> = (0..m)
            .map(|k| {
                let zeta = Complex64::from_polar(1.0, TAU * k as f64 / m as f64);
                scale / (zeta - z).norm_sqr()
            })
            .collect();
        let field = |w: Complex64| -> Complex64 {
            let wc = w.conj();
            pts.iter().zip(&weights).map(|(&a, &c)| c * (a - w) / (ONE - wc * a)).sum()
        };
        let mut w: Complex64 = pts.iter().zip(&weights).map(|(&a, &c)| c * a).sum();
        let mut f = field(w);
        for _ in 0..50 {
            if f.norm() < 1e-14 {
                return Ok(w);
            }
            let wc = w.conj();
            let (mut da, mut db) = (ZERO, ZERO);
            for (&a, &c) in pts.iter().zip(&weights) {
                let d = ONE / (ONE - wc * a);
                da -= c * d;
                db += c * (a - w) * a * d * d;
            }
            let r = -f;
            let det = da.norm_sqr() - db.norm_sqr();
            let step = (da.conj() * r - db * r.conj()) / det;
            let mut lambda = 1.0;
            let mut accepted = false;
            for _ in 0..10 {
                let trial = w + lambda * step;
                if trial.norm() < 1.0 {
                    let ft = field(trial);
                    if ft.norm() < f.norm() {
                        w = trial;
                        f = ft;
                        accepted = true;
                        break;
                    }
                }
                lambda *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if f.norm() < 1e-10 {
            Ok(w)
        } else {
            Err(Error::BarycenterFailure { z: z.to_string(), residual: f.norm() })
        }
    }

    /// Central-difference `(ex_z, ex_z̄)` with step `δ`.
    pub fn derivatives(&self, z: Complex64, delta: f64) -> Result<(Complex64, Complex64)> {
        let e = |d: Complex64| self.extend(z + d);
        let ex = (e(delta * ONE)? - e(-delta * ONE)?) / (2.0 * delta);
        let ey = (e(delta * I)? - e(-delta * I)?) / (2.0 * delta);
        Ok((0.5 * (ex - I * ey), 0.5 * (ex + I * ey)))
    }

    /// `ex_z̄ / ex_z` at `z`.
    pub fn dilatation_at(&self, z: Complex64, delta: f64) -> Result<Complex64> {
        let (dz, dzb) = self.derivatives(z, delta)?;
        Ok(dzb / dz)
    }
}

/// `ex(φ)(z)` for `|z| < 1`.
pub fn barycentric_extend(phi: &CircleHomeo, z: Complex64) -> Result<Complex64> {
    Extender::new(phi).extend(z)
}

/// The quasiconformal self-map of the closed disk with coefficient `μ` fixing `1, i, -1`,
/// built as `f = j ∘ F₂ ∘ (m/·) ∘ f₁` with `j(w) = 1/w`: `f₁` carries `μ` on `Δ`, and `F₂`
/// carries the reflected coefficient on the exterior, transported to the chart `ω = m/f₁`
/// with `m = min |f₁(S¹)|`, so that the exterior lands in `|ω| <= 1`.
#[derive(Debug, Clone)]
pub struct DiskMap {
    inner: QuasiconformalMap,
    outer: QuasiconformalMap,
    chart_scale: f64,
    normalizer: MoebiusTransform,
    trace: CircleHomeo,
    circle_residual: f64,
}

impl DiskMap {
    fn raw(inner: &QuasiconformalMap, outer: &QuasiconformalMap, m: f64, z: Complex64) -> Complex64 {
        let u = inner.eval(z);
        if u == ZERO {
            return ZERO;
        }
        let v = outer.eval(m / u);
        if v == ZERO {
            return Complex64::new(f64::INFINITY, 0.0);
        }
        ONE / v
    }

    /// `f^μ(z)` for `|z| <= 1`.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let v = Self::raw(&self.inner, &self.outer, self.chart_scale, z);
        self.normalizer.apply_finite(v).unwrap_or(v)
    }

    pub fn trace(&self) -> &CircleHomeo {
        &self.trace
    }

    pub fn into_trace(self) -> CircleHomeo {
        self.trace
    }

    /// `max | |f(ζ_k)| - 1 |` over the boundary samples.
    pub fn circle_residual(&self) -> f64 {
        self.circle_residual
    }

    pub fn inner(&self) -> &QuasiconformalMap {
        &self.inner
    }
}

/// `P(⟨n, q⟩ <= t)` for `q` uniform on the square cell `[-h/2, h/2]²` and a unit normal `n`:
/// the area fraction of a node's cell on one side of a straight cut at signed distance `t`.
fn cell_fraction(n: Complex64, t: f64, h: f64) -> f64 {
    let (a, b) = (0.5 * h * n.re.abs(), 0.5 * h * n.im.abs());
    let (u, v) = (a.max(b), a.min(b));
    if t <= -u - v {
        0.0
    } else if t >= u + v {
        1.0
    } else if v < 1e-12 * h {
        (t + u) / (2.0 * u)
    } else if t <= v - u {
        (t + u + v).powi(2) / (8.0 * u * v)
    } else if t < u - v {
        (t + u) / (2.0 * u)
    } else {
        1.0 - (u + v - t).powi(2) / (8.0 * u * v)
    }
}

/// Solves for the disk map with coefficient `μ` (values outside `Δ` are ignored).
///
/// The jump of the coefficient across `S¹` (and across its image in the outer chart) is
/// sampled with cell-area weights, and values are extended radially across `S¹` before
/// interpolation so that stencils near the circle never mix in the zero exterior.
pub fn disk_map_from_mu(mu: &BeltramiField, samples: usize, options: &SolverOptions) -> Result<DiskMap> {
    let grid = *mu.grid();
    let reach = 1.05;
    if grid.support_radius() < reach {
        return Err(Error::invalid(format!("disk coefficients need a grid with L/2 >= {reach}")));
    }
    let h = grid.spacing();
    let cut = GridField::new(
        grid,
        (0..grid.len()).map(|i| if grid.node_at(i).norm() < 1.0 { mu.values()[i] } else { ZERO }).collect(),
    )?;
    let ext = cut.extended_from_disk(ZERO, 1.0, 4.0 * h);
    let inside = GridField::new(
        grid,
        (0..grid.len())
            .map(|i| {
                let z = grid.node_at(i);
                let r = z.norm();
                if r == 0.0 {
                    return ext.values()[i];
                }
                ext.values()[i] * cell_fraction(z / r, 1.0 - r, h)
            })
            .collect(),
    )?;
    let mu_in = BeltramiField::new(inside, (1.0 + 1.5 * h).min(grid.support_radius()))?;
    let inner = solve_with(&mu_in, options)?;

    let m = (0..samples)
        .map(|k| inner.eval(Complex64::from_polar(1.0, TAU * k as f64 / samples as f64)).norm())
        .fold(f64::INFINITY, f64::min);
    let nu = reflected_coefficient(&ext, &inner, m, reach)?;
    let outer = solve_with(&nu, options)?;

    let boundary = |zeta: Complex64| DiskMap::raw(&inner, &outer, m, zeta);
    let normalizer = normalizer(boundary(ONE), boundary(I), boundary(-ONE))?;
    let mut circle_residual: f64 = 0.0;
    let trace = CircleHomeo::from_fn(samples, |z| {
        let v = normalizer.apply_finite(boundary(z)).unwrap_or(z);
        circle_residual = circle_residual.max((v.norm() - 1.0).abs());
        v
    });
    if circle_residual > 1e-3 {
        return Err(Error::ExtensionRule { residual: circle_residual });
    }
    let trace = trace.map_err(|_| Error::ExtensionRule { residual: circle_residual })?;
    Ok(DiskMap { inner, outer, chart_scale: m, normalizer, trace, circle_residual })
}

/// Coefficient in the chart `ω = m/w` of the second factor: the reflection
/// `μ̂(z) = conj(μ(1/z̄))·z²/z̄²` on `|z| > 1`, pushed forward by the conformal
/// restriction of `f₁` there. `ext` holds `μ` extended radially across `S¹`.
fn reflected_coefficient(ext: &GridField, inner: &QuasiconformalMap, m: f64, reach: f64) -> Result<BeltramiField> {
    let grid = *ext.grid();
    let h = grid.spacing();
    let norm = inner.normalization();
    let a = ONE / (norm.w1 - norm.w0);
    let values = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let omega = grid.node_at(i);
            if omega.norm() > reach {
                return Ok(ZERO);
            }
            if omega == ZERO {
                return Ok(ext.values()[i].conj() * a.conj() / a);
            }
            let z = inner.inverse(m / omega)?;
            let (u, dz, _) = inner.jet(z);
            // |z| - 1 as a function of ω: gradient (z/|z|)·conj(dz/dω), dz/dω = -u²/(m f₁')
            let dz_domega = -(u * u) / (m * dz);
            let grad = z / z.norm() * dz_domega.conj();
            let weight = cell_fraction(grad / grad.norm(), (z.norm() - 1.0) / grad.norm(), h);
            if weight == 0.0 {
                return Ok(ZERO);
            }
            let zc = z.conj();
            let reflected = ext.interpolate(ONE / zc).unwrap_or(ZERO).conj() * (z * z) / (zc * zc);
            let oc = omega.conj();
            Ok(weight * reflected * dz / dz.conj() * (omega * omega) / (oc * oc))
        })
        .collect::<Result<Vec<_>>>()?;
    BeltramiField::new(GridField::new(grid, values)?, reach)
}

/// Boundary trace of the disk map with coefficient `μ`, normalized at `1, i, -1`.
pub fn circle_map_from_mu(mu: &BeltramiField) -> Result<CircleHomeo> {
    disk_map_from_mu(mu, BOUNDARY_SAMPLES, &SolverOptions::default()).map(DiskMap::into_trace)
}

fn clamp_unit(mu: Complex64) -> Complex64 {
    let r = mu.norm();
    if r >= 1.0 - 1e-12 {
        mu * ((1.0 - 1e-12) / r)
    } else {
        mu
    }
}

/// Beltrami coefficient of `ex(φ)` at the nodes of `grid` inside `Δ`, by central
/// differences with step `min(h/2, (1-|z|)/2)`.
pub fn sigma_of_trace(phi: &CircleHomeo, grid: ComplexGrid) -> Result<BeltramiField> {
    let inside: Vec<usize> = (0..grid.len()).filter(|&i| grid.node_at(i).norm() < 1.0).collect();
    let points: Vec<Complex64> = inside.iter().map(|&i| grid.node_at(i)).collect();
    let sampled = sigma_at(phi, &points, 0.5 * grid.spacing())?;
    let mut values = vec![ZERO; grid.len()];
    for (i, v) in inside.into_iter().zip(sampled) {
        values[i] = v;
    }
    BeltramiField::new(GridField::new(grid, values)?, 1.0)
}

/// `σ(μ)`: the coefficient of the barycentric extension of the trace of `f^μ`.
pub fn sigma(mu: &BeltramiField) -> Result<BeltramiField> {
    sigma_of_trace(&circle_map_from_mu(mu)?, *mu.grid())
}

/// `σ` at points of `Δ` by central differences with step `min(step, (1-|z|)/2)`,
/// clamped just below modulus one.
///
/// Points within `EDGE_GAP` of `S¹` take the value at the radial projection onto
/// `|z| = 1 - EDGE_GAP`, where the refined quadrature still resolves the Poisson kernel.
pub fn sigma_at(phi: &CircleHomeo, points: &[Complex64], step: f64) -> Result<Vec<Complex64>> {
    let ext = Extender::new(phi);
    points
        .par_iter()
        .map(|&z| {
            let r = z.norm();
            let z = if r > 1.0 - EDGE_GAP { z * ((1.0 - EDGE_GAP) / r) } else { z };
            ext.dilatation_at(z, step.min(0.5 * (1.0 - z.norm()))).map(clamp_unit)
        })
        .collect()
}

const EDGE_GAP: f64 = 2e-3;

/// `σ` sampled on a polar grid `r_i = (i + 1/2)/n_r`, `θ_j = 2πj/n_θ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarField {
    pub radii: Vec<f64>,
    pub angles: Vec<f64>,
    /// Row-major by radius.
    pub values: Vec<Complex64>,
}

impl PolarField {
    /// Sup norm over samples with `r <= cutoff`.
    pub fn sup_norm_within(&self, cutoff: f64) -> f64 {
        let na = self.angles.len();
        self.values
            .iter()
            .enumerate()
            .filter(|(i, _)| self.radii[i / na] <= cutoff)
            .map(|(_, v)| v.norm())
            .fold(0.0, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Radius beyond which polar sup norms are not reported (finite differences degrade near `S¹`).
pub const POLAR_CUTOFF: f64 = 0.95;

pub fn sigma_polar(phi: &CircleHomeo, n_radii: usize, n_angles: usize) -> Result<PolarField> {
    let radii: Vec<f64> = (0..n_radii).map(|i| (i as f64 + 0.5) / n_radii as f64).collect();
    let angles: Vec<f64> = (0..n_angles).map(|j| TAU * j as f64 / n_angles as f64).collect();
    let ext = Extender::new(phi);
    let values = (0..n_radii * n_angles)
        .into_par_iter()
        .map(|i| {
            let (r, t) = (radii[i / n_angles], angles[i % n_angles]);
            let delta = (0.25 / n_radii as f64).min(0.25 * (1.0 - r));
            ext.dilatation_at(Complex64::from_polar(r, t), delta)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PolarField { radii, angles, values })
}

/// `count` points spread evenly over `|z| <= radius` (sunflower pattern).
pub fn disk_sample(count: usize, radius: f64) -> Vec<Complex64> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|k| Complex64::from_polar(radius * ((k as f64 + 0.5) / count as f64).sqrt(), golden * k as f64))
        .collect()
}

/// `sup |ex(h∘φ∘g)(z) - h(ex(φ)(g(z)))|` over `points`.
pub fn naturality_residual(
    phi: &CircleHomeo,
    g: &MoebiusTransform,
    h: &MoebiusTransform,
    points: &[Complex64],
) -> Result<f64> {
    let composed = phi.conjugated(g, h)?;
    let (lhs, rhs) = (Extender::new(&composed), Extender::new(phi));
    let residuals = points
        .par_iter()
        .map(|&z| {
            let gz = g.apply_finite(z).ok_or_else(|| Error::invalid("g is not a disk automorphism"))?;
            let right = rhs.extend(gz)?;
            let right = h.apply_finite(right).ok_or_else(|| Error::invalid("h is not a disk automorphism"))?;
            Ok((lhs.extend(z)? - right).norm())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(residuals.into_iter().fold(0.0, f64::max))
}

/// Finite-difference consistency of `t ↦ σ(path(t))` at fixed points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessReport {
    pub t0: f64,
    pub step: f64,
    /// `sup |σ(t0+h) - σ(t0)|` and the same for `h/2`.
    pub first_differences: [f64; 2],
    pub first_order: f64,
    /// `sup |σ(t0+h) - 2σ(t0) + σ(t0-h)| / h²` and the same for `h/2`.
    pub second_differences: [f64; 2],
    pub second_ratio: f64,
}

pub fn smoothness_probe<F>(path: F, t0: f64, step: f64, points: &[Complex64]) -> Result<SmoothnessReport>
where
    F: Fn(f64) -> Result<BeltramiField>,
{
    let sample = |t: f64| -> Result<Vec<Complex64>> { sigma_at(&circle_map_from_mu(&path(t)?)?, points, 1.0 / 128.0) };
    let center = sample(t0)?;
    let sup = |a: &[Complex64], b: &[Complex64], c: &[Complex64], scale: f64| {
        a.iter().zip(b).zip(c).map(|((x, y), z)| (x - 2.0 * y + z).norm() * scale).fold(0.0, f64::max)
    };
    let mut first = [0.0; 2];
    let mut second = [0.0; 2];
    for (slot, h) in [step, 0.5 * step].into_iter().enumerate() {
        let plus = sample(t0 + h)?;
        let minus = sample(t0 - h)?;
        first[slot] = plus.iter().zip(&center).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        second[slot] = sup(&plus, &center, &minus, 1.0 / (h * h));
    }
    let ratio = |a: f64, b: f64| if a == 0.0 && b == 0.0 { 1.0 } else { a / b };
    Ok(SmoothnessReport {
        t0,
        step,
        first_differences: first,
        first_order: (first[0] / first[1]).log2(),
        second_differences: second,
        second_ratio: ratio(second[0], second[1]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_extends_to_identity() {
        let id = CircleHomeo::identity(BOUNDARY_SAMPLES);
        for z in disk_sample(50, 0.99) {
            assert!((barycentric_extend(&id, z).unwrap() - z).norm() < 1e-12);
        }
        assert!(barycentric_extend(&id, ZERO).unwrap().norm() < 1e-15);
        assert!(barycentric_extend(&id, ONE).is_err());
    }

    #[test]
    fn moebius_traces_extend_to_themselves() {
        let h = MoebiusTransform::disk_automorphism(2.0, Complex64::new(0.5, -0.3)).unwrap();
        let phi = CircleHomeo::from_moebius(&h, BOUNDARY_SAMPLES).unwrap();
        for z in disk_sample(40, 0.9) {
            assert!((barycentric_extend(&phi, z).unwrap() - h.apply_finite(z).unwrap()).norm() < 1e-8);
        }
    }

    #[test]
    fn rotations_are_natural() {
        let id = CircleHomeo::identity(BOUNDARY_SAMPLES);
        let g = MoebiusTransform::disk_automorphism(0.7, ZERO).unwrap();
        let h = MoebiusTransform::disk_automorphism(-1.9, ZERO).unwrap();
        let pts = disk_sample(50, 0.9);
        assert!(naturality_residual(&id, &g, &h, &pts).unwrap() < 1e-8);
        let e = MoebiusTransform::identity();
        assert!(naturality_residual(&id, &e, &e, &pts).unwrap() < 1e-12);
    }

    #[test]
    fn zero_coefficient_gives_identity_trace() {
        let grid = ComplexGrid::new(4.0, 128).unwrap();
        let phi = circle_map_from_mu(&BeltramiField::zero(grid)).unwrap();
        assert!(phi.sup_angular_distance(&CircleHomeo::identity(BOUNDARY_SAMPLES)).unwrap() < 1e-12);
        let s = sigma_of_trace(&phi, grid).unwrap();
        assert!(s.sup_norm() < 1e-9);
    }
}
