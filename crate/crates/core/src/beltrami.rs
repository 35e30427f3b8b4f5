//! Beltrami coefficients on grids and closed sets of the sphere.

use crate::error::{Error, Result};
use crate::grid::{ComplexGrid, GridField};
use crate::moebius::MoebiusTransform;
use crate::sphere::SpherePoint;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A grid-sampled coefficient with `‖μ‖∞ < 1`, vanishing outside `|z| <= support_radius`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeltramiField {
    field: GridField,
    support_radius: f64,
}

impl BeltramiField {
    pub fn new(field: GridField, support_radius: f64) -> Result<Self> {
        let grid = *field.grid();
        if !(support_radius >= 0.0) || support_radius > grid.support_radius() * (1.0 + 1e-12) {
            return Err(Error::invalid(format!(
                "support radius {support_radius} exceeds L/2 = {}",
                grid.support_radius()
            )));
        }
        let norm = field.max_abs();
        if norm >= 1.0 {
            return Err(Error::invalid(format!("sup norm {norm} is not below 1")));
        }
        let outside = field
            .values()
            .iter()
            .enumerate()
            .any(|(i, v)| *v != ZERO && grid.node_at(i).norm() > support_radius);
        if outside {
            return Err(Error::invalid("nonzero samples outside the declared support radius"));
        }
        Ok(BeltramiField { field, support_radius })
    }

    /// Samples `f` on the grid, zeroing nodes outside `support_radius`.
    pub fn from_fn<F>(grid: ComplexGrid, support_radius: f64, f: F) -> Result<Self>
    where
        F: Fn(Complex64) -> Complex64 + Sync,
    {
        let field = GridField::from_fn(grid, |z| if z.norm() <= support_radius { f(z) } else { ZERO });
        Self::new(field, support_radius)
    }

    pub fn zero(grid: ComplexGrid) -> Self {
        BeltramiField { field: GridField::zeros(grid), support_radius: 0.0 }
    }

    pub fn grid(&self) -> &ComplexGrid {
        self.field.grid()
    }

    pub fn field(&self) -> &GridField {
        &self.field
    }

    pub fn values(&self) -> &[Complex64] {
        self.field.values()
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    pub fn sup_norm(&self) -> f64 {
        self.field.max_abs()
    }

    pub fn dilatation(&self) -> f64 {
        dilatation(self.sup_norm())
    }

    pub fn is_zero(&self) -> bool {
        self.values().iter().all(|v| *v == ZERO)
    }

    /// `t·μ`; fails if the result leaves the unit ball.
    pub fn scaled(&self, t: Complex64) -> Result<Self> {
        Self::new(self.field.scale(t), self.support_radius)
    }

    /// Value at an arbitrary point: interpolated inside the support disk, zero outside.
    pub fn sample(&self, z: Complex64) -> Complex64 {
        if z.norm() > self.support_radius {
            return ZERO;
        }
        self.field.interpolate(z).unwrap_or(ZERO)
    }

    /// Sup of `|μ - ν|` over nodes.
    pub fn distance(&self, other: &BeltramiField) -> Result<f64> {
        self.field.max_abs_diff(&other.field)
    }
}

/// `K = (1 + k)/(1 - k)`.
pub fn dilatation(k: f64) -> f64 {
    (1.0 + k) / (1.0 - k)
}

/// Largest coefficient norm with dilatation `K`.
pub fn norm_from_dilatation(big_k: f64) -> f64 {
    (big_k - 1.0) / (big_k + 1.0)
}

/// `g_*μ` sampled on `target`: `ν(w) = μ(g⁻¹w) · (g'/conj g')(g⁻¹w)`.
pub fn pushforward_onto(mu: &BeltramiField, g: &MoebiusTransform, target: ComplexGrid) -> Result<BeltramiField> {
    let r = mu.support_radius;
    let image_radius = if mu.is_zero() {
        0.0
    } else {
        let (c, rr) = g.map_disk(ZERO, r.max(1e-12))?;
        c.norm() + rr
    };
    if image_radius > target.support_radius() * (1.0 + 1e-9) {
        return Err(Error::domain(format!(
            "pushed support reaches |w| = {image_radius:.4}, beyond L/2 = {}",
            target.support_radius()
        )));
    }
    let inv = g.inverse();
    let field = GridField::from_fn(target, |w| {
        let Some(z) = inv.apply_finite(w) else { return ZERO };
        if z.norm() > r {
            return ZERO;
        }
        let d = g.derivative(z).expect("z is not the pole of g");
        mu.sample(z) * d / d.conj()
    });
    let radius = image_radius.min(target.support_radius());
    let field = GridField::new(*field.grid(), zero_outside(field, radius))?;
    BeltramiField::new(field, radius)
}

fn zero_outside(field: GridField, radius: f64) -> Vec<Complex64> {
    let grid = *field.grid();
    field
        .into_values()
        .into_iter()
        .enumerate()
        .map(|(i, v)| if grid.node_at(i).norm() > radius { ZERO } else { v })
        .collect()
}

/// `g_*μ` on the grid of `μ`.
pub fn pushforward(mu: &BeltramiField, g: &MoebiusTransform) -> Result<BeltramiField> {
    pushforward_onto(mu, g, *mu.grid())
}

/// Residual of the defining relation `μ = (ν∘g)·conj(g')/g'` at the nodes of
/// `μ`'s grid whose image lies inside the interpolable part of `ν`'s grid.
pub fn pushforward_residual(mu: &BeltramiField, nu: &BeltramiField, g: &MoebiusTransform) -> f64 {
    let grid = *mu.grid();
    let target = *nu.grid();
    let margin = target.half_width() - 2.0 * target.spacing();
    (0..grid.len())
        .filter_map(|i| {
            let z = grid.node_at(i);
            let w = g.apply_finite(z)?;
            if w.re.abs() > margin || w.im.abs() > margin {
                return None;
            }
            let d = g.derivative(z).ok()?;
            let pulled = nu.sample(w) * d.conj() / d;
            Some((mu.values()[i] - pulled).norm())
        })
        .fold(0.0, f64::max)
}

/// Sup over nodes of `|(μ∘g)·conj(g')/g' - μ|`; zero iff `μ` is `g`-invariant.
pub fn invariance_residual(mu: &BeltramiField, g: &MoebiusTransform) -> f64 {
    let grid = *mu.grid();
    let margin = grid.half_width() - 2.0 * grid.spacing();
    (0..grid.len())
        .filter_map(|i| {
            let z = grid.node_at(i);
            let w = g.apply_finite(z)?;
            if w.re.abs() > margin || w.im.abs() > margin {
                return None;
            }
            let d = g.derivative(z).ok()?;
            Some((mu.sample(w) * d.conj() / d - mu.values()[i]).norm())
        })
        .fold(0.0, f64::max)
}

/// Field equal to `ν` on the complement of `E` and to `μ` on `E`.
pub fn restrict_glue(mu: &BeltramiField, set: &SetModel, nu: &BeltramiField) -> Result<BeltramiField> {
    if mu.grid() != nu.grid() {
        return Err(Error::invalid("restrict_glue: grid mismatch"));
    }
    let grid = *mu.grid();
    let values = (0..grid.len())
        .map(|i| if set.contains(grid.node_at(i)) { mu.values()[i] } else { nu.values()[i] })
        .collect();
    BeltramiField::new(GridField::new(grid, values)?, mu.support_radius.max(nu.support_radius))
}

/// Restriction of `μ` to `E` (zero on the complementary disks).
pub fn restrict_to_set(mu: &BeltramiField, set: &SetModel) -> Result<BeltramiField> {
    restrict_glue(mu, set, &BeltramiField::zero(*mu.grid()))
}

/// An open round disk `D(center, radius)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub cx: f64,
    pub cy: f64,
    pub r: f64,
}

impl Disk {
    pub fn new(center: Complex64, r: f64) -> Self {
        Disk { cx: center.re, cy: center.im, r }
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(self.cx, self.cy)
    }

    /// Strict (open disk) membership.
    pub fn contains(&self, z: Complex64) -> bool {
        (z - self.center()).norm() < self.r
    }

    /// Affine chart `ζ ↦ c + rζ` from the unit disk.
    pub fn chart(&self) -> MoebiusTransform {
        MoebiusTransform::affine(Complex64::new(self.r, 0.0), self.center()).expect("positive radius")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SetKind {
    FinitePoints,
    DiskComplement,
}

/// A closed set `E` containing `0, 1, ∞`: either finitely many points or the
/// complement of finitely many disjoint open round disks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SetModelRepr", into = "SetModelRepr")]
pub struct SetModel {
    kind: SetKind,
    points: Vec<SpherePoint>,
    disks: Vec<Disk>,
}

#[derive(Serialize, Deserialize)]
struct SetModelRepr {
    kind: SetKind,
    #[serde(default)]
    points: Vec<SpherePoint>,
    #[serde(default)]
    disks: Vec<Disk>,
}

impl TryFrom<SetModelRepr> for SetModel {
    type Error = Error;

    fn try_from(r: SetModelRepr) -> Result<Self> {
        match r.kind {
            SetKind::FinitePoints => SetModel::finite_points(r.points),
            SetKind::DiskComplement => SetModel::disk_complement(r.disks),
        }
    }
}

impl From<SetModel> for SetModelRepr {
    fn from(s: SetModel) -> Self {
        SetModelRepr { kind: s.kind, points: s.points, disks: s.disks }
    }
}

impl SetModel {
    pub fn finite_points(points: Vec<SpherePoint>) -> Result<Self> {
        for required in [SpherePoint::new(0.0, 0.0), SpherePoint::new(1.0, 0.0), SpherePoint::Infinity] {
            if !points.iter().any(|p| p.chordal(required) < 1e-12) {
                return Err(Error::invalid(format!("finite set must contain {required}")));
            }
        }
        for (i, p) in points.iter().enumerate() {
            if points[i + 1..].iter().any(|q| q.chordal(*p) < 1e-12) {
                return Err(Error::invalid(format!("duplicate point {p}")));
            }
        }
        Ok(SetModel { kind: SetKind::FinitePoints, points, disks: Vec::new() })
    }

    /// Disks are stored sorted by center (real part, then imaginary part).
    pub fn disk_complement(mut disks: Vec<Disk>) -> Result<Self> {
        for d in &disks {
            if !(d.r > 0.0 && d.r.is_finite() && d.cx.is_finite() && d.cy.is_finite()) {
                return Err(Error::invalid(format!("bad disk {d:?}")));
            }
            for p in [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)] {
                if d.contains(p) {
                    return Err(Error::invalid(format!("disk {d:?} contains {p}, which must lie in E")));
                }
            }
        }
        for (i, a) in disks.iter().enumerate() {
            for b in &disks[i + 1..] {
                if (a.center() - b.center()).norm() <= a.r + b.r {
                    return Err(Error::invalid(format!("disks {a:?} and {b:?} are not separated")));
                }
            }
        }
        disks.sort_by(|a, b| a.cx.total_cmp(&b.cx).then(a.cy.total_cmp(&b.cy)));
        Ok(SetModel { kind: SetKind::DiskComplement, points: Vec::new(), disks })
    }

    pub fn kind(&self) -> SetKind {
        self.kind
    }

    pub fn points(&self) -> &[SpherePoint] {
        &self.points
    }

    pub fn disks(&self) -> &[Disk] {
        &self.disks
    }

    /// Membership of a finite point in `E`.
    pub fn contains(&self, z: Complex64) -> bool {
        match self.kind {
            SetKind::DiskComplement => self.disk_index(z).is_none(),
            SetKind::FinitePoints => self.points.iter().any(|p| p.chordal(z.into()) < 1e-12),
        }
    }

    pub fn disk_index(&self, z: Complex64) -> Option<usize> {
        self.disks.iter().position(|d| d.contains(z))
    }

    /// Index of the disk matching `(center, r)` within `tol`.
    pub fn find_disk(&self, center: Complex64, r: f64, tol: f64) -> Option<usize> {
        self.disks.iter().position(|d| (d.center() - center).norm() < tol && (d.r - r).abs() < tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> ComplexGrid {
        ComplexGrid::new(4.0, 64).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn norms_and_dilatation() {
        assert_eq!(BeltramiField::zero(grid()).sup_norm(), 0.0);
        assert_eq!(BeltramiField::zero(grid()).dilatation(), 1.0);
        let mu = BeltramiField::from_fn(grid(), 1.5, |_| c(0.3, 0.0)).unwrap();
        assert!((mu.sup_norm() - 0.3).abs() < 1e-15);
        assert!((dilatation(1.0 / 3.0) - 2.0).abs() < 1e-15);
        assert!((dilatation(0.5) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn constructor_rejects_norm_one_and_support_violations() {
        assert!(BeltramiField::from_fn(grid(), 1.0, |_| c(1.0, 0.0)).is_err());
        assert!(BeltramiField::from_fn(grid(), 2.5, |_| c(0.1, 0.0)).is_err());
        let f = GridField::from_fn(grid(), |_| c(0.1, 0.0));
        assert!(BeltramiField::new(f, 1.0).is_err());
    }

    #[test]
    fn pushforward_of_zero_is_zero() {
        let g = MoebiusTransform::disk_automorphism(0.3, c(0.2, 0.1)).unwrap();
        let nu = pushforward(&BeltramiField::zero(grid()), &g).unwrap();
        assert!(nu.is_zero());
    }

    #[test]
    fn pushforward_by_scaling_resamples() {
        let src = ComplexGrid::new(4.0, 64).unwrap();
        let dst = ComplexGrid::new(8.0, 64).unwrap();
        let f = |z: Complex64| c(0.2, 0.1) * (-(z - c(0.5, -0.3)).norm_sqr()).exp();
        let mu = BeltramiField::from_fn(src, 2.0, f).unwrap();
        let g = MoebiusTransform::affine(c(2.0, 0.0), c(0.0, 0.0)).unwrap();
        let nu = pushforward_onto(&mu, &g, dst).unwrap();
        for i in 0..dst.len() {
            let w = dst.node_at(i);
            let want = if (w / 2.0).norm() <= 2.0 { f(w / 2.0) } else { Complex64::new(0.0, 0.0) };
            assert!((nu.values()[i] - want).norm() < 1e-12);
        }
        assert!(pushforward_residual(&mu, &nu, &g) < 1e-10);
    }

    #[test]
    fn pushforward_by_rotation_picks_up_phase() {
        let theta = PI / 2.0;
        let f = |z: Complex64| c(0.25, 0.0) * (-(2.0 * (z - c(0.4, 0.2)).norm_sqr())).exp();
        let mu = BeltramiField::from_fn(grid(), 2.0, f).unwrap();
        let rot = Complex64::from_polar(1.0, theta);
        let g = MoebiusTransform::affine(rot, c(0.0, 0.0)).unwrap();
        let nu = pushforward(&mu, &g).unwrap();
        let w = grid().node(40, 37);
        let want = Complex64::from_polar(1.0, 2.0 * theta) * f(w / rot);
        assert!((nu.sample(w) - want).norm() < 1e-12);
        assert!(pushforward_residual(&mu, &nu, &g) < 1e-10);
    }

    #[test]
    fn pushforward_escaping_grid_is_domain_error() {
        let mu = BeltramiField::from_fn(grid(), 2.0, |_| c(0.1, 0.0)).unwrap();
        let g = MoebiusTransform::affine(c(3.0, 0.0), c(0.0, 0.0)).unwrap();
        assert!(matches!(pushforward(&mu, &g), Err(Error::Domain(_))));
    }

    fn two_disks() -> SetModel {
        SetModel::disk_complement(vec![Disk::new(c(1.0, 1.2), 0.5), Disk::new(c(-1.0, -0.5), 0.7)]).unwrap()
    }

    #[test]
    fn restrict_glue_cases() {
        let e = two_disks();
        let checker = |z: Complex64| {
            let s = ((4.0 * z.re).floor() + (4.0 * z.im).floor()) as i64;
            c(if s % 2 == 0 { 0.2 } else { -0.2 }, 0.0)
        };
        let mu = BeltramiField::from_fn(grid(), 2.0, checker).unwrap();
        let nu = BeltramiField::from_fn(grid(), 2.0, |z| c(0.0, 0.3) * checker(z)).unwrap();
        assert_eq!(restrict_glue(&mu, &e, &mu).unwrap(), mu);

        let zero = BeltramiField::zero(grid());
        assert!(restrict_glue(&zero, &e, &zero).unwrap().is_zero());

        let glued = restrict_glue(&mu, &e, &nu).unwrap();
        for i in 0..grid().len() {
            let z = grid().node_at(i);
            let inside = (z - c(1.0, 1.2)).norm() < 0.5 || (z - c(-1.0, -0.5)).norm() < 0.7;
            let want = if inside { nu.values()[i] } else { mu.values()[i] };
            assert_eq!(glued.values()[i], want);
        }

        let other = BeltramiField::zero(ComplexGrid::new(4.0, 32).unwrap());
        assert!(restrict_glue(&mu, &e, &other).is_err());
    }

    #[test]
    fn set_models_validate() {
        assert!(SetModel::disk_complement(vec![Disk::new(c(0.0, 0.0), 0.5)]).is_err());
        assert!(SetModel::disk_complement(vec![Disk::new(c(3.0, 0.0), 1.0), Disk::new(c(4.5, 0.0), 1.0)]).is_err());
        assert!(SetModel::finite_points(vec![SpherePoint::new(0.0, 0.0), SpherePoint::new(1.0, 0.0)]).is_err());
        let e = SetModel::disk_complement(vec![Disk::new(c(4.0, 0.0), 1.0), Disk::new(c(-4.0, 0.0), 1.0)]).unwrap();
        assert_eq!(e.disks()[0].cx, -4.0);
        assert!(e.contains(c(5.0, 0.0)), "boundary belongs to E");
        assert!(!e.contains(c(4.5, 0.0)));
    }

    #[test]
    fn set_model_json() {
        let e = two_disks();
        let s = serde_json::to_string(&e).unwrap();
        assert!(s.contains("\"kind\":\"disk-complement\""));
        let back: SetModel = serde_json::from_str(&s).unwrap();
        assert_eq!(back, e);
        let f: SetModel =
            serde_json::from_str(r#"{"kind":"finite-points","points":[[0,0],[1,0],"inf",[2,0]]}"#).unwrap();
        assert_eq!(f.points().len(), 4);
        let bad = serde_json::from_str::<SetModel>(r#"{"kind":"finite-points","points":[[0,0]]}"#);
        assert!(bad.is_err());
    }
}
