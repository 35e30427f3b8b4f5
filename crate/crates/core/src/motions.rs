//! Holomorphic motions of finite sets over the unit disk, the domain `B ⊂ ℂ²`, or a
//! finite sample of parameters.

use crate::beltrami::{BeltramiField, SetKind, SetModel};
use crate::error::{Error, Result};
use crate::moebius::MoebiusTransform;
use crate::grid::GridField;
use crate::solver::{beltrami_of, solve_normalized, QuasiconformalMap};
use crate::sphere::SpherePoint;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::{E, TAU};
use std::fmt;
use std::sync::{Arc, Mutex};

/// Smallest chordal separation between images that still counts as injective.
pub const SEPARATION_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ParameterDomain {
    /// `Δ` with basepoint `0`.
    UnitDisk,
    /// `B = {(α, β) : |e^{iα}| + |β| < 1}` with basepoint `(i, 0)`.
    MaximalB,
    /// Finitely many parameters, one of them the basepoint.
    Sampled { points: Vec<Vec<Complex64>>, basepoint: Vec<Complex64> },
}

impl ParameterDomain {
    pub fn dimension(&self) -> usize {
        match self {
            ParameterDomain::UnitDisk => 1,
            ParameterDomain::MaximalB => 2,
            ParameterDomain::Sampled { basepoint, .. } => basepoint.len(),
        }
    }

    pub fn basepoint(&self) -> Vec<Complex64> {
        match self {
            ParameterDomain::UnitDisk => vec![Complex64::new(0.0, 0.0)],
            ParameterDomain::MaximalB => vec![Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0)],
            ParameterDomain::Sampled { basepoint, .. } => basepoint.clone(),
        }
    }

    pub fn contains(&self, x: &[Complex64]) -> bool {
        if x.len() != self.dimension() {
            return false;
        }
        match self {
            ParameterDomain::UnitDisk => x[0].norm() < 1.0,
            ParameterDomain::MaximalB => (-x[0].im).exp() + x[1].norm() < 1.0,
            ParameterDomain::Sampled { points, basepoint } => x == basepoint.as_slice() || points.iter().any(|p| p == x),
        }
    }
}

pub type Evaluator = dyn Fn(&[Complex64], SpherePoint) -> Result<SpherePoint> + Send + Sync;

/// `φ : V × E → Ĉ` with `φ(x₀, ·) = id`.
#[derive(Clone)]
pub struct Motion {
    domain: ParameterDomain,
    set: SetModel,
    evaluator: Arc<Evaluator>,
}

impl fmt::Debug for Motion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Motion").field("domain", &self.domain).field("set", &self.set).finish_non_exhaustive()
    }
}

impl Motion {
    /// Wraps an evaluator after checking that it is the identity at the basepoint
    /// (to `1e-9` chordally) on every point of the finite set `set`.
    pub fn new<F>(domain: ParameterDomain, set: SetModel, evaluator: F) -> Result<Self>
    where
        F: Fn(&[Complex64], SpherePoint) -> Result<SpherePoint> + Send + Sync + 'static,
    {
        if set.kind() != SetKind::FinitePoints {
            return Err(Error::invalid("motions move finite sets"));
        }
        let x0 = domain.basepoint();
        for &z in set.points() {
            let w = evaluator(&x0, z)?;
            if w.chordal(z) > 1e-9 {
                return Err(Error::Construction(format!("basepoint image of {z} is {w}")));
            }
        }
        Ok(Motion { domain, set, evaluator: Arc::new(evaluator) })
    }

    pub fn domain(&self) -> &ParameterDomain {
        &self.domain
    }

    pub fn set(&self) -> &SetModel {
        &self.set
    }

    /// `φ(x, z)`. At the basepoint this is `z` exactly.
    pub fn eval(&self, x: &[Complex64], z: SpherePoint) -> Result<SpherePoint> {
        if !self.domain.contains(x) {
            return Err(Error::domain(format!("parameter {x:?} outside {:?}", self.domain)));
        }
        if x == self.domain.basepoint().as_slice() {
            return Ok(z);
        }
        (self.evaluator)(x, z)
    }

    /// `φ_x` on the points of `E`, in order. Sequential: solver-backed evaluators
    /// parallelize internally and share one solve per parameter.
    pub fn images(&self, x: &[Complex64]) -> Result<Vec<SpherePoint>> {
        self.set.points().iter().map(|&z| self.eval(x, z)).collect()
    }

    /// The same motion on a subset of `E` containing `0, 1, ∞`.
    pub fn restricted(&self, subset: &SetModel) -> Result<Motion> {
        require_subset(subset, &self.set)?;
        Ok(Motion { domain: self.domain.clone(), set: subset.clone(), evaluator: self.evaluator.clone() })
    }
}

fn find_point(set: &SetModel, p: SpherePoint) -> Option<usize> {
    set.points().iter().position(|q| q.chordal(p) < 1e-12)
}

fn require_subset(sub: &SetModel, set: &SetModel) -> Result<()> {
    if sub.kind() != SetKind::FinitePoints {
        return Err(Error::invalid("subset must be finite"));
    }
    match sub.points().iter().find(|&&p| find_point(set, p).is_none()) {
        Some(p) => Err(Error::invalid(format!("{p} is not a point of the larger set"))),
        None => Ok(()),
    }
}

/// `φ̂(x, M_{x₀}(z)) = M_x(φ(x, z))` with `M_x` sending `φ_x(a), φ_x(b), φ_x(c)` to `0, 1, ∞`.
pub fn normalize_motion(phi: &Motion, a: SpherePoint, b: SpherePoint, c: SpherePoint) -> Result<Motion> {
    let triple = [a, b, c];
    for p in triple {
        if find_point(phi.set(), p).is_none() {
            return Err(Error::invalid(format!("{p} is not a point of E")));
        }
    }
    let m0 = MoebiusTransform::from_triple(a, b, c)?;
    let targets = [SpherePoint::new(0.0, 0.0), SpherePoint::new(1.0, 0.0), SpherePoint::Infinity];
    let points = phi
        .set()
        .points()
        .iter()
        .map(|&z| match triple.iter().position(|&p| p == z) {
            Some(k) => targets[k],
            None => m0.apply(z),
        })
        .collect();
    let set = SetModel::finite_points(points)?;
    let back = m0.inverse();
    let inner = phi.clone();
    Motion::new(phi.domain().clone(), set, move |x, w| {
        let images = [inner.eval(x, a)?, inner.eval(x, b)?, inner.eval(x, c)?];
        let mx = MoebiusTransform::from_triple(images[0], images[1], images[2])
            .map_err(|_| Error::DegenerateTriple(format!("{x:?}")))?;
        // M_x sends the triple to 0, 1, ∞ by construction
        if targets.contains(&w) {
            return Ok(w);
        }
        Ok(mx.apply(inner.eval(x, back.apply(w))?))
    })
}

/// The family `t ↦ w^{tμ₀}` with one solve per parameter, shared between evaluations.
pub struct WtmuFamily {
    /// `μ₀` with `‖μ₀‖∞ = 1`, which is not itself a Beltrami coefficient.
    direction: GridField,
    support_radius: f64,
    cache: Mutex<HashMap<(u64, u64), Arc<QuasiconformalMap>>>,
}

impl WtmuFamily {
    pub fn new(direction: GridField, support_radius: f64) -> Result<Self> {
        let norm = direction.max_abs();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("direction field has norm {norm}, expected 1")));
        }
        BeltramiField::new(direction.map(|_, v| 0.5 * v), support_radius)?;
        Ok(WtmuFamily { direction, support_radius, cache: Mutex::new(HashMap::new()) })
    }

    /// The direction `μ/‖μ‖∞` of a nonzero coefficient.
    pub fn along(mu: &BeltramiField) -> Result<Self> {
        if mu.is_zero() {
            return Err(Error::invalid("the zero coefficient has no direction"));
        }
        let k = mu.sup_norm();
        Self::new(mu.field().map(|_, v| v / k), mu.support_radius())
    }

    pub fn direction(&self) -> &GridField {
        &self.direction
    }

    /// `tμ₀`.
    pub fn coefficient(&self, t: Complex64) -> Result<BeltramiField> {
        BeltramiField::new(self.direction.map(|_, v| t * v), self.support_radius)
    }

    pub fn map(&self, t: Complex64) -> Result<Arc<QuasiconformalMap>> {
        let key = (t.re.to_bits(), t.im.to_bits());
        if let Some(m) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(m.clone());
        }
        let map = Arc::new(solve_normalized(&self.coefficient(t)?)?);
        Ok(self.cache.lock().expect("cache lock").entry(key).or_insert(map).clone())
    }

    /// `‖μ_t‖∞` recovered by finite differences of the solved map.
    pub fn recovered_norm(&self, t: Complex64) -> Result<f64> {
        Ok(beltrami_of(self.map(t)?.samples())?.sup_norm())
    }
}

/// `φ(t, z) = w^{tμ₀}(z)` over `Δ` on the finite set `set`.
pub fn wtmu_motion(family: Arc<WtmuFamily>, set: SetModel) -> Result<Motion> {
    Motion::new(ParameterDomain::UnitDisk, set, move |x, z| Ok(family.map(x[0])?.evaluate(z)))
}

/// A sample of `{|z| >= 1} ∪ {|z| <= 1/e}` containing `0, 1, ∞`.
pub fn maximal_example_set() -> SetModel {
    let mut points = vec![SpherePoint::new(0.0, 0.0), SpherePoint::Infinity];
    for (r, count) in [(0.25 / E, 6), (0.6 / E, 8), (1.0 / E, 12), (1.0, 12), (1.5, 8), (3.0, 6)] {
        let shift = if r > 1.0 { 0.5 } else { 0.0 };
        for k in 0..count {
            points.push(Complex64::from_polar(r, TAU * (k as f64 + shift) / count as f64).into());
        }
    }
    SetModel::finite_points(points).expect("sample contains 0, 1, ∞")
}

/// `φ((α, β), z) = z` on `|z| >= 1` and `e^{iα}·e·z + β` on `|z| <= 1/e`, over `B`.
pub fn maximal_example_motion() -> Motion {
    Motion::new(ParameterDomain::MaximalB, maximal_example_set(), |x, z| {
        let Some(w) = z.finite() else { return Ok(z) };
        if w.norm() >= 1.0 - 1e-12 {
            Ok(z)
        } else if w.norm() <= (1.0 + 1e-12) / E {
            Ok(SpherePoint::Finite((Complex64::new(0.0, 1.0) * x[0]).exp() * E * w + x[1]))
        } else {
            Err(Error::domain(format!("{z} lies in the annulus outside the moving set")))
        }
    })
    .expect("identity at (i, 0)")
}

/// `Ψ_E(P_E(μ), z) = w^μ(z)` for `z` in the finite set `set`.
pub fn universal_motion_eval(mu: &BeltramiField, set: &SetModel, z: SpherePoint) -> Result<SpherePoint> {
    Ok(universal_configuration(mu, set)?[find_in_finite(set, z)?])
}

/// `w^μ` on every point of the finite set `set` from a single solve.
pub fn universal_configuration(mu: &BeltramiField, set: &SetModel) -> Result<Vec<SpherePoint>> {
    if set.kind() != SetKind::FinitePoints {
        return Err(Error::invalid("the universal motion is evaluated on finite sets"));
    }
    let w = solve_normalized(mu)?;
    Ok(set.points().iter().map(|&z| w.evaluate(z)).collect())
}

fn find_in_finite(set: &SetModel, z: SpherePoint) -> Result<usize> {
    if set.kind() != SetKind::FinitePoints {
        return Err(Error::invalid("expected a finite set"));
    }
    find_point(set, z).ok_or_else(|| Error::invalid(format!("{z} is not a point of E")))
}

/// Whether `φ_x` keeps every pair of points of `E` at least `SEPARATION_FLOOR` apart.
pub fn motion_injectivity_check(phi: &Motion, x: &[Complex64]) -> Result<bool> {
    Ok(min_separation(&phi.images(x)?) >= SEPARATION_FLOOR)
}

pub fn min_separation(points: &[SpherePoint]) -> f64 {
    let mut best = f64::INFINITY;
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            best = best.min(p.chordal(*q));
        }
    }
    best
}

/// The moved points `(φ_x(ζ₁), …, φ_x(ζ_n))` of a finite set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub points: Vec<SpherePoint>,
    pub images: Vec<SpherePoint>,
}

pub fn trace_map(phi: &Motion, x: &[Complex64]) -> Result<Configuration> {
    Ok(Configuration { points: phi.set().points().to_vec(), images: phi.images(x)? })
}

/// Drops the coordinates of points outside `subset`.
pub fn forget_points(config: &Configuration, subset: &SetModel) -> Result<Configuration> {
    let whole = SetModel::finite_points(config.points.clone())?;
    require_subset(subset, &whole)?;
    let images = subset
        .points()
        .iter()
        .map(|&p| config.images[find_point(&whole, p).expect("checked subset")])
        .collect();
    Ok(Configuration { points: subset.points().to_vec(), images })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionHolomorphyReport {
    pub point: SpherePoint,
    pub coordinate: usize,
    pub steps: Vec<f64>,
    /// `|∂φ^z/∂x̄|` estimated at each step.
    pub residuals: Vec<f64>,
    /// `log(r(h)/r(h'))/log(h/h')` between consecutive steps.
    pub orders: Vec<f64>,
}

/// Cauchy–Riemann residual of `x ↦ φ(x, z)` in one complex coordinate,
/// `|f(x+h) - f(x-h) + i f(x+ih) - i f(x-ih)| / 4h`.
pub fn motion_holomorphy_probe(
    phi: &Motion,
    x0: &[Complex64],
    coordinate: usize,
    z: SpherePoint,
    steps: &[f64],
) -> Result<MotionHolomorphyReport> {
    if coordinate >= phi.domain().dimension() {
        return Err(Error::invalid(format!("no parameter coordinate {coordinate}")));
    }
    let i = Complex64::new(0.0, 1.0);
    let at = |d: Complex64| -> Result<Complex64> {
        let mut x = x0.to_vec();
        x[coordinate] += d;
        phi.eval(&x, z)?.finite().ok_or_else(|| Error::domain(format!("φ(x, {z}) = ∞ near {x0:?}")))
    };
    let residuals = steps
        .iter()
        .map(|&h| {
            let f = [at(h * Complex64::new(1.0, 0.0))?, at(-h * Complex64::new(1.0, 0.0))?, at(h * i)?, at(-h * i)?];
            Ok(((f[0] - f[1] + i * f[2] - i * f[3]) / (4.0 * h)).norm())
        })
        .collect::<Result<Vec<f64>>>()?;
    let orders = residuals
        .windows(2)
        .zip(steps.windows(2))
        .map(|(r, h)| (r[0] / r[1]).ln() / (h[0] / h[1]).ln())
        .collect();
    Ok(MotionHolomorphyReport { point: z, coordinate, steps: steps.to_vec(), residuals, orders })
}

/// `sup_{z ∈ E} d(φ(x₀, z), φ(x₀ + h·v, z))` for each step `h`.
pub fn continuity_probe(phi: &Motion, x0: &[Complex64], direction: &[Complex64], steps: &[f64]) -> Result<Vec<f64>> {
    let base = phi.images(x0)?;
    steps
        .iter()
        .map(|&h| {
            let x: Vec<Complex64> = x0.iter().zip(direction).map(|(a, v)| a + h * v).collect();
            let moved = phi.images(&x)?;
            Ok(base.iter().zip(&moved).map(|(p, q)| p.chordal(*q)).fold(0.0, f64::max))
        })
        .collect()
}

/// Poincaré distance `ρ_Δ(0, x) = ½ log((1+|x|)/(1-|x|))`.
pub fn poincare_distance_from_origin(x: Complex64) -> f64 {
    let r = x.norm();
    0.5 * ((1.0 + r) / (1.0 - r)).ln()
}

/// `(e^{2ρ} - 1)/(e^{2ρ} + 1)` with `ρ = ρ_Δ(0, x)`: the bound on `‖μ_x‖∞`, equal to `|x|`.
pub fn kobayashi_bound(x: Complex64) -> f64 {
    let e = (2.0 * poincare_distance_from_origin(x)).exp();
    (e - 1.0) / (e + 1.0)
}
