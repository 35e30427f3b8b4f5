//! Uniform complex grids, grid-sampled fields and the FFT-based Cauchy and
//! Beurling transforms.
//!
//! A [`ComplexGrid`] covers the square `[-L, L)²` with `N × N` nodes of spacing
//! `h = 2L/N`; node `(j, k)` sits at `(-L + j h) + i(-L + k h)` and is stored
//! row-major at index `k N + j`. Transforms treat the square as a period cell.

use crate::error::{Error, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::{Read, Write};
use std::sync::{Arc, Mutex, OnceLock};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexGrid {
    half_width: f64,
    n: usize,
}

impl ComplexGrid {
    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::invalid(format!("half width must be positive, got {half_width}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::invalid(format!("resolution must be a power of two >= 8, got {n}")));
        }
        Ok(ComplexGrid { half_width, n })
    }

    /// The default working grid: `L = 4`, `N = 512`.
    pub fn standard() -> Self {
        ComplexGrid { half_width: 4.0, n: 512 }
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Radius inside which coefficients handed to the transforms must live.
    pub fn support_radius(&self) -> f64 {
        0.5 * self.half_width
    }

    pub fn node(&self, j: usize, k: usize) -> Complex64 {
        let h = self.spacing();
        Complex64::new(-self.half_width + j as f64 * h, -self.half_width + k as f64 * h)
    }

    pub fn node_at(&self, index: usize) -> Complex64 {
        self.node(index % self.n, index / self.n)
    }

    pub fn nodes(&self) -> impl Iterator<Item = Complex64> + '_ {
        (0..self.len()).map(move |i| self.node_at(i))
    }

    /// Index of the node nearest to `z`, if `z` lies inside the grid square.
    pub fn nearest_index(&self, z: Complex64) -> Option<usize> {
        let h = self.spacing();
        let j = ((z.re + self.half_width) / h).round();
        let k = ((z.im + self.half_width) / h).round();
        if j < 0.0 || k < 0.0 || j >= self.n as f64 || k >= self.n as f64 {
            return None;
        }
        Some(k as usize * self.n + j as usize)
    }

    /// Angular wavenumbers of the period cell, in FFT order.
    fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n as isize;
        (0..n)
            .map(|m| {
                let m = if m < n / 2 { m } else { m - n };
                PI * m as f64 / self.half_width
            })
            .collect()
    }
}

/// Cosine roll-off window: 1 on `r <= L/2`, 0 on `r >= 3L/4`.
pub fn taper(r: f64, half_width: f64) -> f64 {
    let a = 0.5 * half_width;
    let b = 0.75 * half_width;
    if r <= a {
        1.0
    } else if r >= b {
        0.0
    } else {
        0.5 * (1.0 + (PI * (r - a) / (b - a)).cos())
    }
}

/// A complex sample per node of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    grid: ComplexGrid,
    values: Vec<Complex64>,
}

impl GridField {
    pub fn new(grid: ComplexGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::invalid(format!("non-finite sample at node {i}")));
        }
        Ok(GridField { grid, values })
    }

    pub fn zeros(grid: ComplexGrid) -> Self {
        GridField { grid, values: vec![ZERO; grid.len()] }
    }

    pub fn from_fn<F>(grid: ComplexGrid, f: F) -> Self
    where
        F: Fn(Complex64) -> Complex64 + Sync,
    {
        let values = (0..grid.len()).into_par_iter().map(|i| f(grid.node_at(i))).collect();
        GridField { grid, values }
    }

    pub fn grid(&self) -> &ComplexGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn get(&self, j: usize, k: usize) -> Complex64 {
        self.values[k * self.grid.n + j]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn map<F: Fn(Complex64, Complex64) -> Complex64 + Sync>(&self, f: F) -> GridField {
        let values = self
            .values
            .par_iter()
            .enumerate()
            .map(|(i, &v)| f(self.grid.node_at(i), v))
            .collect();
        GridField { grid: self.grid, values }
    }

    pub fn scale(&self, a: Complex64) -> GridField {
        self.map(|_, v| a * v)
    }

    /// Pointwise `a·self + b·other`.
    pub fn combine(&self, a: Complex64, other: &GridField, b: Complex64) -> Result<GridField> {
        if self.grid != other.grid {
            return Err(Error::invalid("grid mismatch"));
        }
        let values = self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect();
        Ok(GridField { grid: self.grid, values })
    }

    pub fn max_abs_diff(&self, other: &GridField) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::invalid("grid mismatch"));
        }
        Ok(self.values.iter().zip(&other.values).fold(0.0, |m, (x, y)| m.max((x - y).norm())))
    }

    /// Discrete L² norm, `h² Σ |v|²` under the square root.
    pub fn l2_norm(&self) -> f64 {
        let h = self.grid.spacing();
        h * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Fails unless the field is negligible (relative 1e-2) on `|z| >= 3L/4`.
    pub fn check_compact_support(&self) -> Result<()> {
        let peak = self.max_abs();
        if peak == 0.0 {
            return Ok(());
        }
        let cut = 0.75 * self.grid.half_width;
        let tail = self
            .values
            .iter()
            .enumerate()
            .filter(|(i, _)| self.grid.node_at(*i).norm() >= cut)
            .fold(0.0_f64, |m, (_, v)| m.max(v.norm()));
        if tail > 1e-2 * peak {
            return Err(Error::domain(format!(
                "field not compactly supported: |f| = {tail:.3e} at |z| >= {cut} (peak {peak:.3e})"
            )));
        }
        Ok(())
    }

    /// Tensor-product cubic Lagrange interpolation; `None` outside `[-L, L-h]²`.
    pub fn interpolate(&self, z: Complex64) -> Option<Complex64> {
        self.interpolate_with_gradient(z).map(|(v, _, _)| v)
    }

    /// Copy in which nodes of the band `r <= |z - c| < r + band` take the value interpolated
    /// `3h` inside the circle along their radius, so that interpolation near the circle only
    /// draws on values from inside it.
    pub fn extended_from_disk(&self, center: Complex64, r: f64, band: f64) -> GridField {
        let h = self.grid.spacing();
        let depth = (r - 3.0 * h).max(0.0);
        let values = (0..self.grid.len())
            .into_par_iter()
            .map(|i| {
                let d = self.grid.node_at(i) - center;
                let rho = d.norm();
                if rho < r || rho >= r + band {
                    return self.values[i];
                }
                self.interpolate(center + d * (depth / rho)).unwrap_or(ZERO)
            })
            .collect();
        GridField { grid: self.grid, values }
    }

    /// Interpolated value together with its x- and y-derivatives.
    pub fn interpolate_with_gradient(&self, z: Complex64) -> Option<(Complex64, Complex64, Complex64)> {
        let g = &self.grid;
        let h = g.spacing();
        let n = g.n;
        let sx = (z.re + g.half_width) / h;
        let sy = (z.im + g.half_width) / h;
        let top = (n - 1) as f64;
        if !(sx >= -1e-9 && sy >= -1e-9 && sx <= top + 1e-9 && sy <= top + 1e-9) {
            return None;
        }
        let j0 = (sx.floor() as isize).clamp(1, n as isize - 3) as usize;
        let k0 = (sy.floor() as isize).clamp(1, n as isize - 3) as usize;
        let (wx, dx) = lagrange4(sx - j0 as f64);
        let (wy, dy) = lagrange4(sy - k0 as f64);
        let mut v = ZERO;
        let mut vx = ZERO;
        let mut vy = ZERO;
        for (b, (&cy, &cdy)) in wy.iter().zip(&dy).enumerate() {
            let row = (k0 + b - 1) * n;
            let mut r = ZERO;
            let mut rx = ZERO;
            for (a, (&cx, &cdx)) in wx.iter().zip(&dx).enumerate() {
                let s = self.values[row + j0 + a - 1];
                r += s * cx;
                rx += s * cdx;
            }
            v += r * cy;
            vx += rx * cy;
            vy += r * cdy;
        }
        Some((v, vx / h, vy / h))
    }

    /// Writes `re(z), im(z), re(v), im(v)` rows in node order.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["re_z", "im_z", "re_v", "im_v"])?;
        for (i, v) in self.values.iter().enumerate() {
            let z = self.grid.node_at(i);
            w.write_record(&[
                format!("{:e}", z.re),
                format!("{:e}", z.im),
                format!("{:e}", v.re),
                format!("{:e}", v.im),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a field written by [`GridField::write_csv`], recovering the grid
    /// from the sample count and the first node.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let mut first: Option<Complex64> = None;
        let mut values = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            if rec.len() != 4 {
                return Err(Error::Parse(format!("expected 4 columns, got {}", rec.len())));
            }
            let num = |i: usize| -> Result<f64> {
                rec[i].trim().parse::<f64>().map_err(|e| Error::Parse(format!("{e}: {:?}", &rec[i])))
            };
            if first.is_none() {
                first = Some(Complex64::new(num(0)?, num(1)?));
            }
            values.push(Complex64::new(num(2)?, num(3)?));
        }
        let n = (values.len() as f64).sqrt().round() as usize;
        if n * n != values.len() {
            return Err(Error::Parse(format!("{} samples do not form a square grid", values.len())));
        }
        let corner = first.ok_or_else(|| Error::Parse("empty field file".into()))?;
        let grid = ComplexGrid::new(-corner.re, n)?;
        GridField::new(grid, values)
    }
}

/// Weights and t-derivatives of cubic Lagrange interpolation on nodes -1, 0, 1, 2.
fn lagrange4(t: f64) -> ([f64; 4], [f64; 4]) {
    let w = [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ];
    let d = [
        -(3.0 * t * t - 6.0 * t + 2.0) / 6.0,
        (3.0 * t * t - 4.0 * t - 1.0) / 2.0,
        -(3.0 * t * t - 2.0 * t - 2.0) / 2.0,
        (3.0 * t * t - 1.0) / 6.0,
    ];
    (w, d)
}

/// Row/column 2-D FFT of a square array, rows processed in parallel.
pub(crate) struct Fft2 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft2 { n, forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n) }
    }

    fn pass(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        data.par_chunks_mut(n).for_each(|row| fft.process(row));
        transpose(data, n);
        data.par_chunks_mut(n).for_each(|row| fft.process(row));
        transpose(data, n);
    }

    pub(crate) fn forward(&self, data: &mut [Complex64]) {
        self.pass(data, &self.forward);
    }

    /// Inverse transform including the `1/N²` normalization.
    pub(crate) fn inverse(&self, data: &mut [Complex64]) {
        self.pass(data, &self.inverse);
        let s = 1.0 / (self.n * self.n) as f64;
        data.par_iter_mut().for_each(|v| *v *= s);
    }
}

fn transpose(data: &mut [Complex64], n: usize) {
    for k in 0..n {
        for j in (k + 1)..n {
            data.swap(k * n + j, j * n + k);
        }
    }
}

/// Fourier multipliers of the periodic Cauchy and Beurling transforms.
pub(crate) struct Spectral {
    pub(crate) fft: Fft2,
    cauchy: Vec<Complex64>,
    beurling: Vec<Complex64>,
}

impl Spectral {
    fn new(grid: &ComplexGrid) -> Self {
        let n = grid.n;
        let kw = grid.wavenumbers();
        let mut cauchy = vec![ZERO; n * n];
        let mut beurling = vec![ZERO; n * n];
        for (ky_i, &ky) in kw.iter().enumerate() {
            for (kx_i, &kx) in kw.iter().enumerate() {
                if kx_i == 0 && ky_i == 0 {
                    continue;
                }
                // d/dzbar has symbol (i/2)(kx + i ky); d/dz has (i/2)(kx - i ky).
                let k = Complex64::new(kx, ky);
                let idx = ky_i * n + kx_i;
                cauchy[idx] = Complex64::new(0.0, -2.0) / k;
                beurling[idx] = k.conj() / k;
            }
        }
        Spectral { fft: Fft2::new(n), cauchy, beurling }
    }

    pub(crate) fn for_grid(grid: &ComplexGrid) -> Arc<Spectral> {
        static CACHE: OnceLock<Mutex<HashMap<(u64, usize), Arc<Spectral>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let key = (grid.half_width.to_bits(), grid.n);
        let mut map = cache.lock().expect("spectral cache poisoned");
        map.entry(key).or_insert_with(|| Arc::new(Spectral::new(grid))).clone()
    }

    fn apply(&self, data: &mut [Complex64], multiplier: &[Complex64]) {
        self.fft.forward(data);
        data.par_iter_mut().zip(multiplier.par_iter()).for_each(|(v, m)| *v *= m);
        self.fft.inverse(data);
    }

    pub(crate) fn cauchy_in_place(&self, data: &mut [Complex64]) {
        self.apply(data, &self.cauchy);
    }

    pub(crate) fn beurling_in_place(&self, data: &mut [Complex64]) {
        self.apply(data, &self.beurling);
    }
}

/// Periodic solid Cauchy transform: the zero-mean `g` with `∂̄g = f - mean(f)`.
pub fn cauchy_transform(f: &GridField) -> Result<GridField> {
    f.check_compact_support()?;
    let spectral = Spectral::for_grid(&f.grid);
    let mut data = f.values.clone();
    spectral.cauchy_in_place(&mut data);
    Ok(GridField { grid: f.grid, values: data })
}

/// Periodic Beurling transform `S`, characterized by `S(∂̄φ) = ∂φ`.
///
/// The multiplier is `conj(k)/k`, unimodular on every nonzero mode and zero on
/// the mean, matching the vanishing mean of `Sf` for compactly supported `f`.
pub fn beurling_transform(f: &GridField) -> Result<GridField> {
    f.check_compact_support()?;
    let spectral = Spectral::for_grid(&f.grid);
    let mut data = f.values.clone();
    spectral.beurling_in_place(&mut data);
    Ok(GridField { grid: f.grid, values: data })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_arithmetic() {
        let g = ComplexGrid::new(4.0, 8).unwrap();
        assert_eq!(g.spacing(), 1.0);
        assert_eq!(g.len(), 64);
        assert_eq!(g.node(0, 0), Complex64::new(-4.0, -4.0));
        let g = ComplexGrid::new(4.0, 512).unwrap();
        assert_eq!(g.spacing(), 0.015625);
    }

    #[test]
    fn grid_rejects_bad_arguments() {
        assert!(matches!(ComplexGrid::new(1.0, 6), Err(Error::InvalidArgument(_))));
        assert!(matches!(ComplexGrid::new(1.0, 4), Err(Error::InvalidArgument(_))));
        assert!(matches!(ComplexGrid::new(0.0, 8), Err(Error::InvalidArgument(_))));
        assert!(matches!(ComplexGrid::new(-2.0, 16), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn field_rejects_wrong_length_and_nan() {
        let g = ComplexGrid::new(1.0, 8).unwrap();
        assert!(GridField::new(g, vec![ZERO; 63]).is_err());
        let mut v = vec![ZERO; 64];
        v[5] = Complex64::new(f64::NAN, 0.0);
        assert!(GridField::new(g, v).is_err());
    }

    #[test]
    fn zero_maps_to_zero() {
        let g = ComplexGrid::new(4.0, 64).unwrap();
        let z = GridField::zeros(g);
        assert_eq!(cauchy_transform(&z).unwrap().max_abs(), 0.0);
        assert_eq!(beurling_transform(&z).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn constant_field_is_not_compactly_supported() {
        let g = ComplexGrid::new(4.0, 64).unwrap();
        let one = GridField::from_fn(g, |_| Complex64::new(1.0, 0.0));
        assert!(matches!(cauchy_transform(&one), Err(Error::Domain(_))));
        assert!(matches!(beurling_transform(&one), Err(Error::Domain(_))));
    }

    #[test]
    fn interpolation_reproduces_cubics() {
        let g = ComplexGrid::new(2.0, 32).unwrap();
        let f = |z: Complex64| z * z * z - Complex64::new(0.0, 2.0) * z.conj() * z + 1.0;
        let field = GridField::from_fn(g, f);
        for &z in &[Complex64::new(0.123, -0.77), Complex64::new(-1.5, 1.2), Complex64::new(1.85, 1.85)] {
            let v = field.interpolate(z).unwrap();
            assert!((v - f(z)).norm() < 1e-11, "{z}: {v} vs {}", f(z));
        }
        assert!(field.interpolate(Complex64::new(2.5, 0.0)).is_none());
    }

    #[test]
    fn interpolation_gradient_matches_polynomial() {
        let g = ComplexGrid::new(2.0, 32).unwrap();
        // f = x^2 y + i x
        let field = GridField::from_fn(g, |z| Complex64::new(z.re * z.re * z.im, z.re));
        let z = Complex64::new(0.31, -0.42);
        let (_, fx, fy) = field.interpolate_with_gradient(z).unwrap();
        assert!((fx - Complex64::new(2.0 * z.re * z.im, 1.0)).norm() < 1e-11);
        assert!((fy - Complex64::new(z.re * z.re, 0.0)).norm() < 1e-11);
    }

    #[test]
    fn csv_round_trip() {
        let g = ComplexGrid::new(1.5, 8).unwrap();
        let f = GridField::from_fn(g, |z| z * z + Complex64::new(0.25, -1.0));
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let back = GridField::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.grid(), f.grid());
        assert!(back.max_abs_diff(&f).unwrap() < 1e-14);
    }

    #[test]
    fn taper_profile() {
        assert_eq!(taper(1.0, 4.0), 1.0);
        assert_eq!(taper(2.0, 4.0), 1.0);
        assert!((taper(2.5, 4.0) - 0.5).abs() < 1e-15);
        assert_eq!(taper(3.0, 4.0), 0.0);
    }
}
