//! Normalized solutions of the Beltrami equation `w_z̄ = μ w_z` fixing `0, 1, ∞`.

use crate::beltrami::BeltramiField;
use crate::error::{Error, Result};
use crate::grid::{ComplexGrid, GridField, Spectral};
use crate::sphere::SpherePoint;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `Σ' (m + in)^-4` over the Gaussian integers, `Γ(1/4)^8 / (960π²)`.
const GAUSSIAN_G4: f64 = 3.151_212_002_153_900_3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Largest admissible `‖μ‖∞`.
    pub k_max: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Relaxation weight of the fixed-point update; `1` is the plain Neumann series.
    pub relaxation: f64,
    /// Start from `φ = 0` instead of `φ = μ`.
    pub zero_start: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { k_max: 0.9, tolerance: 1e-12, max_iterations: 500, relaxation: 1.0, zero_start: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub residual: f64,
    pub norm: f64,
    #[serde(rename = "K")]
    pub dilatation: f64,
}

/// Images of `0` and `1` under the principal solution, before the affine correction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub w0: Complex64,
    pub w1: Complex64,
}

/// Grid samples of `w^μ` with cubic interpolation, Newton inversion and a
/// far-field expansion beyond the grid.
#[derive(Debug, Clone)]
pub struct QuasiconformalMap {
    samples: GridField,
    mu: BeltramiField,
    normalization: Normalization,
    /// Constant and moments `∫φ ζ^j` of the principal solution `z + c + Σ m_j/(π z^{j+1})`.
    far_constant: Complex64,
    moments: [Complex64; 4],
    report: SolveReport,
}

/// Moments `h² Σ φ ζ^j`, j = 0..3.
fn moments(grid: &ComplexGrid, phi: &[Complex64]) -> [Complex64; 4] {
    let h2 = grid.spacing() * grid.spacing();
    let n = grid.n();
    let rows: Vec<[Complex64; 4]> = phi
        .par_chunks(n)
        .enumerate()
        .map(|(k, row)| {
            let mut m = [ZERO; 4];
            for (j, &v) in row.iter().enumerate() {
                if v == ZERO {
                    continue;
                }
                let z = grid.node(j, k);
                let mut p = v;
                for slot in m.iter_mut() {
                    *slot += p;
                    p *= z;
                }
            }
            m
        })
        .collect();
    let mut m = [ZERO; 4];
    for r in rows {
        for (a, b) in m.iter_mut().zip(r) {
            *a += b;
        }
    }
    m.map(|v| v * h2)
}

/// `g2 / (60π)` for the period lattice `2L(Z + iZ)` of the grid.
fn lattice_coefficient(grid: &ComplexGrid) -> f64 {
    let period = 2.0 * grid.half_width();
    GAUSSIAN_G4 / period.powi(4) / PI
}

/// `Sφ` on the plane: the periodic multiplier plus the leading image-lattice correction.
fn beurling_plane(spectral: &Spectral, grid: &ComplexGrid, phi: &[Complex64], out: &mut Vec<Complex64>) {
    out.clear();
    out.extend_from_slice(phi);
    spectral.beurling_in_place(out);
    let m = moments(grid, phi);
    let c = 3.0 * lattice_coefficient(grid);
    out.par_iter_mut().enumerate().for_each(|(i, v)| {
        let z = grid.node_at(i);
        *v += c * (m[0] * z * z - 2.0 * m[1] * z + m[2]);
    });
}

/// `Cφ` on the plane up to an additive constant.
fn cauchy_plane(spectral: &Spectral, grid: &ComplexGrid, phi: &[Complex64]) -> Vec<Complex64> {
    let mut out = phi.to_vec();
    spectral.cauchy_in_place(&mut out);
    let m = moments(grid, phi);
    let area = 4.0 * grid.half_width() * grid.half_width();
    let c = lattice_coefficient(grid);
    out.par_iter_mut().enumerate().for_each(|(i, v)| {
        let z = grid.node_at(i);
        *v += m[0] * z.conj() / area + c * (((m[0] * z - 3.0 * m[1]) * z + 3.0 * m[2]) * z - m[3]);
    });
    out
}

/// Solves `φ = μ + μ Sφ` and returns the normalized map `w = z + Cφ` fixing `0, 1, ∞`.
pub fn solve_normalized(mu: &BeltramiField) -> Result<QuasiconformalMap> {
    solve_with(mu, &SolverOptions::default())
}

pub fn solve_with(mu: &BeltramiField, options: &SolverOptions) -> Result<QuasiconformalMap> {
    let norm = mu.sup_norm();
    if norm > options.k_max {
        return Err(Error::invalid(format!("‖μ‖∞ = {norm:.4} exceeds k_max = {}", options.k_max)));
    }
    let grid = *mu.grid();
    let spectral = Spectral::for_grid(&grid);
    let m = mu.values();
    let omega = options.relaxation;

    let mut phi: Vec<Complex64> = if options.zero_start { vec![ZERO; grid.len()] } else { m.to_vec() };
    let mut s = Vec::with_capacity(grid.len());
    let mut iterations = 0;
    let mut residual = 0.0;
    if !mu.is_zero() {
        loop {
            if iterations == options.max_iterations {
                return Err(Error::SolverFailure { iterations, residual });
            }
            iterations += 1;
            beurling_plane(&spectral, &grid, &phi, &mut s);
            residual = phi
                .par_iter_mut()
                .zip(s.par_iter())
                .zip(m.par_iter())
                .map(|((p, &sv), &mv)| {
                    let next = mv * (ONE + sv);
                    let next = if omega == 1.0 { next } else { (1.0 - omega) * *p + omega * next };
                    let d = (next - *p).norm();
                    *p = next;
                    d
                })
                .reduce(|| 0.0, f64::max);
            if !residual.is_finite() {
                return Err(Error::SolverFailure { iterations, residual });
            }
            if residual < options.tolerance {
                break;
            }
        }
    }

    let cphi = cauchy_plane(&spectral, &grid, &phi);
    let raw: Vec<Complex64> = cphi.iter().enumerate().map(|(i, c)| grid.node_at(i) + c).collect();
    let raw = GridField::new(grid, raw)?;
    let mom = moments(&grid, &phi);
    let far_constant = fit_far_constant(&raw, &mom);
    let w0 = raw.interpolate(ZERO).expect("0 lies on the grid");
    let w1 = raw.interpolate(ONE).expect("1 lies on the grid");
    if (w1 - w0).norm() < 1e-12 {
        return Err(Error::Construction("normalization points collapsed".into()));
    }
    let scale = ONE / (w1 - w0);
    let samples = raw.map(|_, v| (v - w0) * scale);
    let map = QuasiconformalMap {
        samples,
        mu: mu.clone(),
        normalization: Normalization { w0, w1 },
        far_constant,
        moments: mom,
        report: SolveReport { iterations, residual, norm, dilatation: mu.dilatation() },
    };
    let bad = map.orientation_defects();
    if !bad.is_empty() {
        return Err(Error::Construction(format!("discrete Jacobian not positive at {} nodes", bad.len())));
    }
    Ok(map)
}

fn far_field(z: Complex64, mom: &[Complex64; 4]) -> Complex64 {
    let inv = ONE / z;
    let mut p = inv;
    let mut s = ZERO;
    for m in mom {
        s += m * p;
        p *= inv;
    }
    s / PI
}

fn far_field_derivative(z: Complex64, mom: &[Complex64; 4]) -> Complex64 {
    let inv = ONE / z;
    let mut p = inv * inv;
    let mut s = ZERO;
    for (j, m) in mom.iter().enumerate() {
        s -= (j + 1) as f64 * m * p;
        p *= inv;
    }
    s / PI
}

/// Additive constant matching the grid solution to the far-field series on an annulus.
fn fit_far_constant(raw: &GridField, mom: &[Complex64; 4]) -> Complex64 {
    let grid = raw.grid();
    let (lo, hi) = (0.6 * grid.half_width(), 0.7 * grid.half_width());
    let (sum, count) = raw
        .values()
        .iter()
        .enumerate()
        .filter_map(|(i, v)| {
            let z = grid.node_at(i);
            let r = z.norm();
            (r >= lo && r <= hi).then(|| v - z - far_field(z, mom))
        })
        .fold((ZERO, 0usize), |(s, c), d| (s + d, c + 1));
    sum / count.max(1) as f64
}

impl QuasiconformalMap {
    pub fn grid(&self) -> &ComplexGrid {
        self.samples.grid()
    }

    pub fn samples(&self) -> &GridField {
        &self.samples
    }

    pub fn mu(&self) -> &BeltramiField {
        &self.mu
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn report(&self) -> SolveReport {
        self.report
    }

    fn normalize(&self, raw: Complex64) -> Complex64 {
        (raw - self.normalization.w0) / (self.normalization.w1 - self.normalization.w0)
    }

    /// `(w, w_z, w_z̄)` at a finite point.
    pub fn jet(&self, z: Complex64) -> (Complex64, Complex64, Complex64) {
        // Grid values are trusted up to 0.6L; the far-field series takes over by 0.7L,
        // with a smoothstep blend across the annulus where its constant was fitted.
        let l = self.grid().half_width();
        let s = ((z.norm() - 0.6 * l) / (0.1 * l)).clamp(0.0, 1.0);
        let s = s * s * (3.0 - 2.0 * s);
        let near = (s < 1.0).then(|| self.samples.interpolate_with_gradient(z)).flatten();
        let scale = ONE / (self.normalization.w1 - self.normalization.w0);
        let far = || {
            let w = self.normalize(z + self.far_constant + far_field(z, &self.moments));
            (w, scale * (ONE + far_field_derivative(z, &self.moments)), ZERO)
        };
        match near {
            Some((v, vx, vy)) => {
                let i = Complex64::new(0.0, 1.0);
                let (dz, dzbar) = (0.5 * (vx - i * vy), 0.5 * (vx + i * vy));
                if s == 0.0 {
                    return (v, dz, dzbar);
                }
                let (fw, fdz, _) = far();
                (v + s * (fw - v), dz + s * (fdz - dz), (1.0 - s) * dzbar)
            }
            None => far(),
        }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.jet(z).0
    }

    pub fn evaluate(&self, z: SpherePoint) -> SpherePoint {
        match z {
            SpherePoint::Infinity => SpherePoint::Infinity,
            SpherePoint::Finite(z) => SpherePoint::Finite(self.eval(z)),
        }
    }

    /// Newton inversion; the residual `|w(z) - target|` is below `1e-10` on success.
    pub fn inverse_evaluate(&self, target: SpherePoint) -> Result<SpherePoint> {
        match target {
            SpherePoint::Infinity => Ok(SpherePoint::Infinity),
            SpherePoint::Finite(t) => self.inverse(t).map(SpherePoint::Finite),
        }
    }

    pub fn inverse(&self, t: Complex64) -> Result<Complex64> {
        let Normalization { w0, w1 } = self.normalization;
        let seed = w0 + t * (w1 - w0);
        if let Some(z) = self.newton(t, seed) {
            return Ok(z);
        }
        if let Some(z) = self.newton(t, self.nearest_node_seed(t)) {
            return Ok(z);
        }
        Err(Error::InverseFailure { target: t.to_string(), residual: (self.eval(seed) - t).norm() })
    }

    pub(crate) fn newton(&self, t: Complex64, seed: Complex64) -> Option<Complex64> {
        let tol = 1e-12 * t.norm().max(1.0);
        let mut z = seed;
        let (mut w, mut a, mut b) = self.jet(z);
        let mut res = (w - t).norm();
        for _ in 0..60 {
            if res < tol {
                return Some(z);
            }
            let r = t - w;
            let det = a.norm_sqr() - b.norm_sqr();
            if !(det > 0.0) {
                return None;
            }
            let step = (a.conj() * r - b * r.conj()) / det;
            let mut lambda = 1.0;
            loop {
                let trial = z + lambda * step;
                let (tw, ta, tb) = self.jet(trial);
                let tres = (tw - t).norm();
                if tres < res || lambda < 1e-4 {
                    z = trial;
                    (w, a, b) = (tw, ta, tb);
                    res = tres;
                    break;
                }
                lambda *= 0.5;
            }
        }
        (res < 1e-10 * t.norm().max(1.0)).then_some(z)
    }

    fn nearest_node_seed(&self, t: Complex64) -> Complex64 {
        let (i, _) = self
            .samples
            .values()
            .par_iter()
            .enumerate()
            .map(|(i, v)| (i, (v - t).norm()))
            .reduce(|| (0, f64::INFINITY), |a, b| if b.1 < a.1 || (b.1 == a.1 && b.0 < a.0) { b } else { a });
        self.grid().node_at(i)
    }

    /// Interior nodes where `|w_z|² - |w_z̄|² <= 0`.
    pub fn orientation_defects(&self) -> Vec<usize> {
        let (dz, dzb) = derivatives(&self.samples);
        let n = self.grid().n();
        (0..self.grid().len())
            .filter(|&i| {
                let (j, k) = (i % n, i / n);
                j > 0 && k > 0 && j + 1 < n && k + 1 < n && dz[i].norm_sqr() - dzb[i].norm_sqr() <= 0.0
            })
            .collect()
    }

    pub fn beltrami(&self) -> Result<BeltramiField> {
        beltrami_of(&self.samples)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        self.samples.write_csv(writer)
    }
}

/// Finite-difference `(w_z, w_z̄)` at every node: fourth-order centered inside, second order
/// next to the edges (one-sided on them).
pub fn derivatives(w: &GridField) -> (Vec<Complex64>, Vec<Complex64>) {
    let grid = w.grid();
    let n = grid.n();
    let h = grid.spacing();
    let v = w.values();
    let diff = |i0: usize, stride: usize, pos: usize| -> Complex64 {
        if pos == 0 {
            (-3.0 * v[i0] + 4.0 * v[i0 + stride] - v[i0 + 2 * stride]) / (2.0 * h)
        } else if pos == n - 1 {
            (3.0 * v[i0] - 4.0 * v[i0 - stride] + v[i0 - 2 * stride]) / (2.0 * h)
        } else if pos == 1 || pos == n - 2 {
            (v[i0 + stride] - v[i0 - stride]) / (2.0 * h)
        } else {
            (8.0 * (v[i0 + stride] - v[i0 - stride]) - (v[i0 + 2 * stride] - v[i0 - 2 * stride])) / (12.0 * h)
        }
    };
    let i = Complex64::new(0.0, 1.0);
    (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let wx = diff(idx, 1, idx % n);
            let wy = diff(idx, n, idx / n);
            (0.5 * (wx - i * wy), 0.5 * (wx + i * wy))
        })
        .unzip()
}

/// Finite-difference Beltrami coefficient `w_z̄ / w_z` of grid samples.
///
/// Values are clamped below modulus one and zeroed outside `|z| <= L/2`.
pub fn beltrami_of(w: &GridField) -> Result<BeltramiField> {
    let grid = *w.grid();
    let (dz, dzb) = derivatives(w);
    let scale = w.max_abs().max(1.0) / grid.half_width();
    let singular: Vec<usize> = (0..grid.len()).filter(|&i| dz[i].norm() < 1e-12 * scale).collect();
    if !singular.is_empty() {
        return Err(Error::SingularNodes { nodes: singular });
    }
    let radius = grid.support_radius();
    let values = (0..grid.len())
        .map(|i| {
            if grid.node_at(i).norm() > radius {
                return ZERO;
            }
            let mu = dzb[i] / dz[i];
            let r = mu.norm();
            if r >= 1.0 - 1e-12 {
                mu * ((1.0 - 1e-12) / r)
            } else {
                mu
            }
        })
        .collect();
    BeltramiField::new(GridField::new(grid, values)?, radius)
}

/// Cauchy–Riemann residuals of `λ ↦ w^{μ(λ)}(z)` at several points and step sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolomorphyReport {
    pub lambda0: Complex64,
    pub steps: Vec<f64>,
    pub points: Vec<Complex64>,
    /// `residuals[p][s]` for point `p` and step `s`.
    pub residuals: Vec<Vec<f64>>,
    /// `log2(r(h)/r(h/2))` between consecutive steps.
    pub orders: Vec<Vec<f64>>,
}

/// `|∂f/∂λ̄|` by `(f(λ+h) - f(λ-h) + i f(λ+ih) - i f(λ-ih)) / 4h` for each point and step.
pub fn holomorphy_probe<F>(
    family: F,
    points: &[Complex64],
    lambda0: Complex64,
    steps: &[f64],
    options: &SolverOptions,
) -> Result<HolomorphyReport>
where
    F: Fn(Complex64) -> Result<BeltramiField> + Sync,
{
    let i = Complex64::new(0.0, 1.0);
    let mut residuals = vec![Vec::with_capacity(steps.len()); points.len()];
    for &h in steps {
        let offsets = [h * ONE, -h * ONE, h * i, -h * i];
        let maps = offsets
            .iter()
            .map(|d| family(lambda0 + d).and_then(|mu| solve_with(&mu, options)))
            .collect::<Result<Vec<_>>>()?;
        for (p, &z) in points.iter().enumerate() {
            let f: Vec<Complex64> = maps.iter().map(|m| m.eval(z)).collect();
            let r = (f[0] - f[1] + i * f[2] - i * f[3]) / (4.0 * h);
            residuals[p].push(r.norm());
        }
    }
    let orders = residuals
        .iter()
        .map(|r| {
            r.windows(2)
                .zip(steps.windows(2))
                .map(|(rv, hv)| (rv[0] / rv[1]).ln() / (hv[0] / hv[1]).ln())
                .collect()
        })
        .collect();
    Ok(HolomorphyReport { lambda0, steps: steps.to_vec(), points: points.to_vec(), residuals, orders })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_coefficient_gives_identity() {
        let g = ComplexGrid::new(4.0, 64).unwrap();
        let w = solve_normalized(&BeltramiField::zero(g)).unwrap();
        assert_eq!(w.report().iterations, 0);
        for i in 0..g.len() {
            assert!((w.samples().values()[i] - g.node_at(i)).norm() < 1e-12);
        }
        let z = c(2.0, 3.0);
        assert!((w.eval(z) - z).norm() < 1e-12);
        assert!((w.eval(c(9.0, -7.0)) - c(9.0, -7.0)).norm() < 1e-12);
    }

    #[test]
    fn affine_samples_have_constant_coefficient() {
        let g = ComplexGrid::new(4.0, 64).unwrap();
        let k = 0.4;
        let w = GridField::from_fn(g, |z| (z + k * z.conj()) / (1.0 + k));
        let mu = beltrami_of(&w).unwrap();
        for (i, v) in mu.values().iter().enumerate() {
            if g.node_at(i).norm() <= 2.0 {
                assert!((v - k).norm() < 1e-8);
            }
        }
        assert!((mu.dilatation() - (1.0 + k) / (1.0 - k)).abs() < 1e-6);
    }

    #[test]
    fn principal_solution_with_nonzero_mean() {
        // F = z + k zbar q(|z|^2) with q(s) = 1/s for s >= 1, so F - z = k/z outside the
        // unit disk and the coefficient has nonzero integral.
        let k = 0.2;
        let q = |s: f64| if s >= 1.0 { 1.0 / s } else { 1.0 - (s - 1.0) + (s - 1.0).powi(2) - (s - 1.0).powi(3) };
        let dq = |s: f64| if s >= 1.0 { -1.0 / (s * s) } else { -1.0 + 2.0 * (s - 1.0) - 3.0 * (s - 1.0).powi(2) };
        let f = |z: Complex64| (z + k * z.conj() * q(z.norm_sqr())) / (1.0 + k);
        let mu_f = |z: Complex64| {
            let s = z.norm_sqr();
            k * (q(s) + s * dq(s)) / (1.0 + k * z.conj() * z.conj() * dq(s))
        };
        let g = ComplexGrid::new(4.0, 256).unwrap();
        let mu = BeltramiField::from_fn(g, 1.0, |z| if z.norm() < 1.0 { mu_f(z) } else { ZERO }).unwrap();
        let w = solve_normalized(&mu).unwrap();
        for t in 0..40 {
            let z = Complex64::from_polar(0.05 * t as f64, 0.37 * t as f64);
            assert!((w.eval(z) - f(z)).norm() < 1e-5, "at {z}");
        }
        for z in [c(6.0, 5.0), c(-20.0, 3.0)] {
            assert!((w.eval(z) - f(z)).norm() < 1e-5, "far field at {z}");
        }
    }

    #[test]
    fn inverse_round_trip() {
        let g = ComplexGrid::new(4.0, 128).unwrap();
        let mu = BeltramiField::from_fn(g, 2.0, |z| c(0.3, 0.2) * (-(2.0 * z.norm_sqr())).exp()).unwrap();
        let w = solve_normalized(&mu).unwrap();
        for t in 0..25 {
            let z = Complex64::from_polar(0.2 * t as f64, 1.3 * t as f64);
            let back = w.inverse(w.eval(z)).unwrap();
            assert!((back - z).norm() < 1e-8);
        }
        assert_eq!(w.inverse_evaluate(SpherePoint::Infinity).unwrap(), SpherePoint::Infinity);
    }

    #[test]
    fn k_max_enforced() {
        let g = ComplexGrid::new(4.0, 32).unwrap();
        let mu = BeltramiField::from_fn(g, 1.0, |_| c(0.95, 0.0)).unwrap();
        assert!(matches!(solve_normalized(&mu), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn singular_nodes_reported() {
        let g = ComplexGrid::new(4.0, 16).unwrap();
        let w = GridField::from_fn(g, |z| z.conj());
        match beltrami_of(&w) {
            Err(Error::SingularNodes { nodes }) => assert_eq!(nodes.len(), g.len()),
            other => panic!("unexpected {other:?}"),
        }
    }
}
