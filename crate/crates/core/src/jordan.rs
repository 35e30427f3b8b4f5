//! Jordan curves through finitely many moving marked points: quasiconformal extensions
//! of finite motions built from bump translations, curve tracing, and simplicity checks.

use crate::beltrami::{SetKind, SetModel};
use crate::error::{Error, Result};
use crate::fields::Bump;
use crate::grid::{ComplexGrid, GridField};
use crate::motions::{kobayashi_bound, min_separation, poincare_distance_from_origin, trace_map, Motion, WtmuFamily};
use crate::solver::{beltrami_of, solve_normalized, solve_with, QuasiconformalMap, SolverOptions};
use crate::sphere::SpherePoint;
use num_complex::Complex64;
use robust::{orient2d, Coord};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::sync::Arc;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Vertices beyond this modulus (or at ∞) move the simplicity test to a Möbius chart.
pub const FAR_VERTEX: f64 = 1e6;

/// A closed polyline on the sphere, traversed cyclically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JordanCurve {
    vertices: Vec<SpherePoint>,
}

impl JordanCurve {
    pub fn new(vertices: Vec<SpherePoint>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::invalid("a closed polyline needs at least 3 vertices"));
        }
        for (k, v) in vertices.iter().enumerate() {
            let next = vertices[(k + 1) % vertices.len()];
            if v.chordal(next) < 1e-14 {
                return Err(Error::invalid(format!("vertices {k} and {} coincide", (k + 1) % vertices.len())));
            }
        }
        Ok(JordanCurve { vertices })
    }

    pub fn regular_polygon(n: usize, center: Complex64, radius: f64) -> Result<Self> {
        Self::new((0..n).map(|k| (center + Complex64::from_polar(radius, TAU * k as f64 / n as f64)).into()).collect())
    }

    /// The closed polyline through `corners`, each finite edge split into `per_edge` pieces.
    /// Edges ending at ∞ are kept whole.
    pub fn through(corners: &[SpherePoint], per_edge: usize) -> Result<Self> {
        let n = corners.len();
        let mut vertices = Vec::with_capacity(n * per_edge.max(1));
        for k in 0..n {
            let (a, b) = (corners[k], corners[(k + 1) % n]);
            vertices.push(a);
            if let (Some(a), Some(b)) = (a.finite(), b.finite()) {
                for j in 1..per_edge {
                    vertices.push((a + (b - a) * (j as f64 / per_edge as f64)).into());
                }
            }
        }
        Self::new(vertices)
    }

    pub fn vertices(&self) -> &[SpherePoint] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex_index(&self, p: SpherePoint) -> Option<usize> {
        self.vertices.iter().position(|v| v.chordal(p) < 1e-12)
    }

    /// CSV rows `re,im`, with `inf,inf` for ∞.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["re", "im"])?;
        for v in &self.vertices {
            match v {
                SpherePoint::Finite(z) => w.write_record([z.re.to_string(), z.im.to_string()])?,
                SpherePoint::Infinity => w.write_record(["inf", "inf"])?,
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut vertices = Vec::new();
        for row in csv::Reader::from_reader(reader).records() {
            let row = row?;
            let (re, im) = (row.get(0).unwrap_or(""), row.get(1).unwrap_or(""));
            if re == "inf" {
                vertices.push(SpherePoint::Infinity);
                continue;
            }
            let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{s:?}: {e}")));
            vertices.push(SpherePoint::new(parse(re)?, parse(im)?));
        }
        Self::new(vertices)
    }
}

/// Planar coordinates of the vertices: the identity chart when every vertex is finite and
/// moderate, otherwise `1/(z - p)` with `p` a sample point far (chordally) from the curve.
fn chart(vertices: &[SpherePoint]) -> Vec<Coord<f64>> {
    let far = |v: &SpherePoint| v.finite().is_none_or(|z| z.norm() > FAR_VERTEX);
    let coord = |z: Complex64| Coord { x: z.re, y: z.im };
    if !vertices.iter().any(far) {
        return vertices.iter().map(|v| coord(v.finite().expect("finite vertex"))).collect();
    }
    let candidates = (0..96).map(|k| Complex64::from_polar([0.3, 1.0, 3.0][k % 3], TAU * (k as f64 + 0.5) / 96.0));
    let p = candidates
        .map(|c| (c, vertices.iter().map(|v| v.chordal(c.into())).fold(f64::INFINITY, f64::min)))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty candidates")
        .0;
    vertices
        .iter()
        .map(|v| match v {
            SpherePoint::Infinity => coord(ZERO),
            SpherePoint::Finite(z) => coord(ONE / (z - p)),
        })
        .collect()
}

fn on_box(p: Coord<f64>, q: Coord<f64>, r: Coord<f64>) -> bool {
    r.x >= p.x.min(q.x) && r.x <= p.x.max(q.x) && r.y >= p.y.min(q.y) && r.y <= p.y.max(q.y)
}

/// Closed segments `[a, b]` and `[c, d]` share a point (exact predicates).
fn segments_meet(a: Coord<f64>, b: Coord<f64>, c: Coord<f64>, d: Coord<f64>) -> bool {
    let (d1, d2) = (orient2d(c, d, a), orient2d(c, d, b));
    let (d3, d4) = (orient2d(a, b, c), orient2d(a, b, d));
    if d1 * d2 < 0.0 && d3 * d4 < 0.0 {
        return true;
    }
    (d1 == 0.0 && on_box(c, d, a))
        || (d2 == 0.0 && on_box(c, d, b))
        || (d3 == 0.0 && on_box(a, b, c))
        || (d4 == 0.0 && on_box(a, b, d))
}

/// The first pair of edges `(i, j)` (edge `i` joins vertices `i` and `i+1`) that meet
/// other than at a shared vertex, if any.
pub fn first_crossing(gamma: &JordanCurve) -> Option<(usize, usize)> {
    let p = chart(gamma.vertices());
    let n = p.len();
    for i in 0..n {
        let (a, b, c) = (p[i], p[(i + 1) % n], p[(i + 2) % n]);
        // adjacent edges may only share their common vertex: no fold back along a line
        let dot = (a.x - b.x) * (c.x - b.x) + (a.y - b.y) * (c.y - b.y);
        if orient2d(a, b, c) == 0.0 && dot > 0.0 {
            return Some((i, (i + 1) % n));
        }
    }
    for i in 0..n {
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            if segments_meet(p[i], p[(i + 1) % n], p[j], p[(j + 1) % n]) {
                return Some((i, j));
            }
        }
    }
    None
}

/// Whether the closed polyline is simple.
pub fn jordan_check(gamma: &JordanCurve) -> bool {
    first_crossing(gamma).is_none()
}

/// Vertexwise image `w(γ)`.
pub fn trace_curve(w: &QuasiconformalMap, gamma: &JordanCurve) -> Result<JordanCurve> {
    trace_curve_with(|v| w.evaluate(v), gamma)
}

/// Vertexwise image of `γ` under any map of the sphere.
pub fn trace_curve_with<F: Fn(SpherePoint) -> SpherePoint>(f: F, gamma: &JordanCurve) -> Result<JordanCurve> {
    JordanCurve::new(gamma.vertices().iter().map(|&v| f(v)).collect())
}

/// Largest bump radius used to move a point.
pub const MAX_BUMP_RADIUS: f64 = 0.4;
/// Lipschitz constant of `ρ ↦ exp(1 - 1/(1 - ρ²))`.
const BUMP_SLOPE: f64 = 2.170_357;
/// Each translation step moves its point by at most this fraction of `r / BUMP_SLOPE`.
const STEP_FRACTION: f64 = 0.1;

/// Long pushes through narrow gaps concentrate dilatation near the bump rims, so the
/// re-solve admits coefficients up to 0.98 and iterates longer.
const EXTENSION_SOLVER: SolverOptions =
    SolverOptions { k_max: 0.98, tolerance: 1e-12, max_iterations: 3000, relaxation: 1.0, zero_start: false };

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtensionOptions {
    /// Number of straight-line continuation steps; chosen automatically when `None`.
    pub steps: Option<usize>,
    /// Required `max_j |w̃(ζ_j) - target_j|`.
    pub tolerance: f64,
    pub max_corrections: usize,
}

impl Default for ExtensionOptions {
    fn default() -> Self {
        ExtensionOptions { steps: None, tolerance: 1e-6, max_corrections: 8 }
    }
}

/// The normalized map `w̃` with `w̃(ζ_j) = target_j`, and how it was reached.
#[derive(Debug, Clone)]
pub struct FiniteExtension {
    pub map: QuasiconformalMap,
    pub steps: usize,
    pub corrections: usize,
    pub residual: f64,
}

/// Bumps moving each marked point in `from` (indices `movers`) by `delta[j]`, with radii
/// keeping the bump disks pairwise disjoint and clear of every other marked point.
fn shifts_at(from: &[Complex64], movers: &[usize], delta: &[Complex64], grid: &ComplexGrid) -> Result<Vec<Bump>> {
    let h = grid.spacing();
    movers
        .iter()
        .filter(|&&j| delta[j] != ZERO)
        .map(|&j| {
            let p = from[j];
            let gap = from.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, q)| (p - q).norm()).fold(f64::INFINITY, f64::min);
            let radius = MAX_BUMP_RADIUS.min(0.45 * gap).min(grid.support_radius() - p.norm() - h);
            if radius < 2.0 * h {
                return Err(Error::Construction(format!(
                    "marked point {p} is too crowded for a bump (gap {gap:.3e}, radius {radius:.3e}, grid spacing {h:.3e})"
                )));
            }
            if delta[j].norm() > STEP_FRACTION * radius / BUMP_SLOPE {
                return Err(Error::invalid("step too long"));
            }
            Ok(Bump { center: p, radius, amplitude: delta[j] })
        })
        .collect()
}

fn plan(sources: &[Complex64], targets: &[Complex64], movers: &[usize], steps: usize, grid: &ComplexGrid) -> Result<Vec<Bump>> {
    let delta: Vec<Complex64> = sources.iter().zip(targets).map(|(a, b)| (b - a) / steps as f64).collect();
    let mut all = Vec::new();
    for k in 0..steps {
        let at: Vec<Complex64> = sources.iter().zip(&delta).map(|(a, d)| a + d * k as f64).collect();
        all.extend(shifts_at(&at, movers, &delta, grid)?);
    }
    Ok(all)
}

/// Bump translations applied in order.
fn compose(bumps: &[Bump], z: Complex64) -> Complex64 {
    bumps.iter().fold(z, |z, b| z + b.eval(z))
}

/// A normalized quasiconformal map sending the points of the finite set `set` to `targets`.
///
/// The points move along straight lines in steps; each step is a sum of disjoint bump
/// translations, so the composite `Ψ` is a diffeomorphism fixing `0, 1, ∞` with
/// `Ψ(ζ_j) = target_j`. Its coefficient is re-solved on `grid`, and the remaining point
/// errors are removed by extra bump translations at the targets.
pub fn extend_finite_motion(
    set: &SetModel,
    targets: &[SpherePoint],
    grid: ComplexGrid,
    options: &ExtensionOptions,
) -> Result<FiniteExtension> {
    if set.kind() != SetKind::FinitePoints {
        return Err(Error::invalid("extensions start from finite sets"));
    }
    let points = set.points();
    if targets.len() != points.len() {
        return Err(Error::invalid(format!("{} targets for {} points", targets.len(), points.len())));
    }
    if min_separation(targets) < crate::motions::SEPARATION_FLOOR {
        return Err(Error::invalid("targets are not injective"));
    }
    let mut sources = Vec::new();
    let mut ends = Vec::new();
    for (&p, &t) in points.iter().zip(targets) {
        match (p, t) {
            (SpherePoint::Infinity, SpherePoint::Infinity) => continue,
            (SpherePoint::Finite(a), SpherePoint::Finite(b)) => {
                let fixed = a == ZERO || a == ONE;
                if fixed && (a - b).norm() > 1e-12 {
                    return Err(Error::invalid(format!("normalization point {a} must stay fixed")));
                }
                for z in [a, b] {
                    if z.norm() >= grid.support_radius() {
                        return Err(Error::domain(format!("{z} lies outside the coefficient support |z| < {}", grid.support_radius())));
                    }
                }
                sources.push(a);
                ends.push(if fixed { a } else { b });
            }
            _ => return Err(Error::invalid(format!("{p} ↦ {t} moves ∞"))),
        }
    }
    let movers: Vec<usize> = (0..sources.len()).filter(|&j| sources[j] != ZERO && sources[j] != ONE).collect();
    let moving = |j: &usize| sources[*j] != ends[*j];
    if !movers.iter().any(moving) {
        let map = solve_normalized(&crate::beltrami::BeltramiField::zero(grid))?;
        return Ok(FiniteExtension { map, steps: 0, corrections: 0, residual: 0.0 });
    }

    let (bumps, steps) = match options.steps {
        Some(k) => (plan(&sources, &ends, &movers, k.max(1), &grid)?, k.max(1)),
        None => {
            let mut k = 1;
            loop {
                match plan(&sources, &ends, &movers, k, &grid) {
                    Ok(b) => break (b, k),
                    Err(Error::InvalidArgument(_)) if k < 1 << 14 => k *= 2,
                    Err(e) => return Err(e),
                }
            }
        }
    };

    let mut correction = vec![ZERO; sources.len()];
    let mut corrections = 0;
    loop {
        let fix = shifts_at(&ends, &movers, &correction, &grid).map_err(|e| match e {
            Error::InvalidArgument(_) => Error::Construction("point correction exceeds a single bump step".into()),
            e => e,
        })?;
        let psi = GridField::from_fn(grid, |z| compose(&fix, compose(&bumps, z)));
        let map = solve_with(&beltrami_of(&psi)?, &EXTENSION_SOLVER)?;
        let errors: Vec<Complex64> = sources.iter().zip(&ends).map(|(&a, &b)| b - map.eval(a)).collect();
        let residual = errors.iter().map(|e| e.norm()).fold(0.0, f64::max);
        if residual < options.tolerance {
            return Ok(FiniteExtension { map, steps, corrections, residual });
        }
        if corrections == options.max_corrections {
            return Err(Error::Construction(format!(
                "marked-point residual {residual:.3e} after {corrections} corrections"
            )));
        }
        for j in &movers {
            correction[*j] += errors[*j];
        }
        corrections += 1;
    }
}

/// Which quasiconformal map realizes `φ_x` on the whole sphere.
#[derive(Clone)]
pub enum Representative {
    /// The motion is `t ↦ w^{tμ₀}`; its own solution is the extension.
    Solver(Arc<WtmuFamily>),
    /// Bump-translation extension of the moved points.
    Bumps { grid: ComplexGrid, options: ExtensionOptions },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremCReport {
    pub x: Complex64,
    /// `max_j d(w̃_x(ζ_j), φ_x(ζ_j))` (chordal).
    pub marked_residual: f64,
    pub mu_norm: f64,
    pub poincare_distance: f64,
    /// `(e^{2ρ} - 1)/(e^{2ρ} + 1)`.
    pub bound: f64,
    /// The norm clause is asserted only for solver representatives.
    pub bound_asserted: bool,
    pub bound_ok: bool,
    pub simple: bool,
    pub curve: JordanCurve,
    pub steps: usize,
    pub corrections: usize,
    pub pass: bool,
}

/// Slack allowed between the finite-difference norm of `μ_x` and the Kobayashi bound.
pub const BOUND_SLACK: f64 = 2e-3;
pub const MARKED_TOLERANCE: f64 = 1e-6;

fn extension_map(phi: &Motion, x: Complex64, rep: &Representative) -> Result<(Arc<QuasiconformalMap>, f64, usize, usize)> {
    match rep {
        Representative::Solver(family) => {
            let map = family.map(x)?;
            let norm = beltrami_of(map.samples())?.sup_norm();
            Ok((map, norm, 0, 0))
        }
        Representative::Bumps { grid, options } => {
            let config = trace_map(phi, &[x])?;
            let ext = extend_finite_motion(phi.set(), &config.images, *grid, options)?;
            let norm = ext.map.mu().sup_norm();
            Ok((Arc::new(ext.map), norm, ext.steps, ext.corrections))
        }
    }
}

/// Builds `w̃_x`, `γ_x = w̃_x(γ₀)` and checks the marked points, simplicity and the norm bound.
pub fn theorem_c_report(phi: &Motion, gamma0: &JordanCurve, x: Complex64, rep: &Representative) -> Result<TheoremCReport> {
    if let Some(p) = phi.set().points().iter().find(|&&p| gamma0.vertex_index(p).is_none()) {
        return Err(Error::invalid(format!("marked point {p} is not a vertex of the curve")));
    }
    let (map, mu_norm, steps, corrections) = extension_map(phi, x, rep)?;
    let moved = phi.images(&[x])?;
    let marked_residual = phi
        .set()
        .points()
        .iter()
        .zip(&moved)
        .map(|(&z, &target)| map.evaluate(z).chordal(target))
        .fold(0.0, f64::max);
    let curve = trace_curve(&map, gamma0)?;
    let simple = jordan_check(&curve);
    let rho = poincare_distance_from_origin(x);
    let bound = kobayashi_bound(x);
    let bound_asserted = matches!(rep, Representative::Solver(_));
    let bound_ok = mu_norm <= bound + BOUND_SLACK;
    let pass = marked_residual < MARKED_TOLERANCE && simple && (bound_ok || !bound_asserted);
    Ok(TheoremCReport {
        x,
        marked_residual,
        mu_norm,
        poincare_distance: rho,
        bound,
        bound_asserted,
        bound_ok,
        simple,
        curve,
        steps,
        corrections,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityReport {
    pub x: Complex64,
    pub steps: Vec<f64>,
    /// `sup |μ_{x + h·x/|x|} - μ_x|` over the grid.
    pub increments: Vec<f64>,
    /// `log2` ratios of consecutive increments (reported only).
    pub orders: Vec<f64>,
}

/// Increments of `x ↦ μ_x` along the radius through `x`. Bump extensions reuse the step
/// count needed at the outermost parameter, so the construction varies continuously.
pub fn mu_continuity_probe(phi: &Motion, x: Complex64, steps: &[f64], rep: &Representative) -> Result<ContinuityReport> {
    let dir = if x == ZERO { ONE } else { x / x.norm() };
    let outer = x + dir * steps.iter().copied().fold(0.0, f64::max);
    let rep = match rep {
        Representative::Bumps { grid, options } if options.steps.is_none() => {
            let (_, _, k, _) = extension_map(phi, outer, rep)?;
            Representative::Bumps { grid: *grid, options: ExtensionOptions { steps: Some(k.max(1)), ..*options } }
        }
        other => other.clone(),
    };
    let coefficient = |t: Complex64| -> Result<GridField> {
        match &rep {
            Representative::Solver(family) => Ok(family.coefficient(t)?.field().clone()),
            Representative::Bumps { .. } => Ok(extension_map(phi, t, &rep)?.0.mu().field().clone()),
        }
    };
    let base = coefficient(x)?;
    let increments = steps
        .iter()
        .map(|&h| base.max_abs_diff(&coefficient(x + dir * h)?))
        .collect::<Result<Vec<f64>>>()?;
    let orders = increments.windows(2).zip(steps.windows(2)).map(|(d, h)| (d[0] / d[1]).ln() / (h[0] / h[1]).ln()).collect();
    Ok(ContinuityReport { x, steps: steps.to_vec(), increments, orders })
}

/// SVG overlay of curves colored from blue (`|x| = 0`) to red (largest `|x|`), clipped to
/// the square `[-half_width, half_width]²`; edges through ∞ or far outside are dropped.
pub fn render_svg(curves: &[(f64, JordanCurve)], half_width: f64) -> String {
    let size = 800.0;
    let scale = size / (2.0 * half_width);
    let top = curves.iter().map(|c| c.0).fold(0.0, f64::max);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (modulus, curve) in curves {
        let s = if top > 0.0 { modulus / top } else { 0.0 };
        let color = format!("rgb({},{},{})", (255.0 * s).round(), 40, (255.0 * (1.0 - s)).round());
        let n = curve.len();
        let mut path = String::new();
        let mut pen_down = false;
        for k in 0..=n {
            let visible = curve.vertices()[k % n].finite().filter(|z| z.re.abs().max(z.im.abs()) <= 4.0 * half_width);
            match visible {
                Some(z) => {
                    let (px, py) = ((z.re + half_width) * scale, (half_width - z.im) * scale);
                    let _ = write!(path, "{}{px:.2},{py:.2} ", if pen_down { "L" } else { "M" });
                    pen_down = true;
                }
                None => pen_down = false,
            }
        }
        let _ = writeln!(
            out,
            r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.2"><title>|x| = {modulus}</title></path>"#,
            path.trim_end()
        );
    }
    out.push_str("</svg>\n");
    out
}
