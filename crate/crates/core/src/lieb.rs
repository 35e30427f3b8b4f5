//! Lieb coordinates for `T(E)` when `E^c` is a finite union of round disks.
//!
//! A point of `T(E)` is stored as the normalized boundary trace of each disk
//! component (transported to `Δ` by the affine chart `ζ ↦ c + rζ`) together
//! with the restriction `μ|E`.

use crate::beltrami::{invariance_residual, pushforward_onto, restrict_to_set, BeltramiField, Disk, SetKind, SetModel};
use crate::circle::CircleHomeo;
use crate::douady_earle::{circle_map_from_mu, sigma_at};
use crate::error::{Error, Result};
use crate::fields::{scaled_bumps_field, Bump};
use crate::grid::{ComplexGrid, GridField};
use crate::moebius::MoebiusTransform;
use crate::solver::{beltrami_of, solve_normalized};
use crate::sphere::SpherePoint;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Grid on which disk components are solved (`Δ` sits well inside its support radius).
pub fn disk_grid() -> ComplexGrid {
    ComplexGrid::standard()
}

#[derive(Debug, Clone)]
pub struct TeichPoint {
    set: SetModel,
    components: Vec<CircleHomeo>,
    mu_on_set: BeltramiField,
}

impl TeichPoint {
    pub fn set(&self) -> &SetModel {
        &self.set
    }

    pub fn components(&self) -> &[CircleHomeo] {
        &self.components
    }

    pub fn mu_on_set(&self) -> &BeltramiField {
        &self.mu_on_set
    }
}

fn require_disks(set: &SetModel) -> Result<()> {
    if set.kind() != SetKind::DiskComplement {
        return Err(Error::invalid("Lieb coordinates need a disk-complement set"));
    }
    Ok(())
}

/// `μ ∘ A` on `Δ` for the chart `A(ζ) = c + rζ` of `disk`, sampled on `grid`.
pub fn transport_to_disk(mu: &BeltramiField, disk: &Disk, grid: ComplexGrid) -> Result<BeltramiField> {
    let (c, r) = (disk.center(), disk.r);
    // A' = r is real, so the coefficient picks up no phase
    BeltramiField::from_fn(grid, 1.0, |zeta| if zeta.norm() < 1.0 { mu.sample(c + r * zeta) } else { ZERO })
}

/// `P̃_E(μ) = (Φ(μ|E^c), μ|E)`.
pub fn project_tilde(mu: &BeltramiField, set: &SetModel) -> Result<TeichPoint> {
    require_disks(set)?;
    let components = set
        .disks()
        .iter()
        .enumerate()
        .map(|(i, d)| {
            transport_to_disk(mu, d, disk_grid())
                .and_then(|m| circle_map_from_mu(&m))
                .map_err(|e| Error::Component { component: i, source: Box::new(e) })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TeichPoint { set: set.clone(), components, mu_on_set: restrict_to_set(mu, set)? })
}

/// Per-coordinate distances between two points of `T(E)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiebDistance {
    /// Sup angular distance of each component trace.
    pub traces: Vec<f64>,
    /// Nodewise sup distance of the `μ|E` fields.
    pub field: f64,
}

impl LiebDistance {
    pub fn max(&self) -> f64 {
        self.traces.iter().copied().fold(self.field, f64::max)
    }
}

pub fn lieb_distance(t1: &TeichPoint, t2: &TeichPoint) -> Result<LiebDistance> {
    if t1.set != t2.set {
        return Err(Error::invalid("points belong to different sets"));
    }
    let traces = t1
        .components
        .iter()
        .zip(&t2.components)
        .map(|(a, b)| a.sup_angular_distance(b))
        .collect::<Result<Vec<_>>>()?;
    Ok(LiebDistance { traces, field: t1.mu_on_set.distance(&t2.mu_on_set)? })
}

/// Equality in `T(E)` at tolerance, through Lieb coordinates.
pub fn lieb_equal(t1: &TeichPoint, t2: &TeichPoint, tol: f64) -> Result<bool> {
    Ok(lieb_distance(t1, t2)?.max() < tol)
}

/// `s(t)`: `σ` of each component trace carried back to its disk, and `μ|E` on `E`.
pub fn de_section(t: &TeichPoint) -> Result<BeltramiField> {
    let grid = *t.mu_on_set.grid();
    let mut values = t.mu_on_set.values().to_vec();
    let mut reach = t.mu_on_set.support_radius();
    for (i, (disk, phi)) in t.set.disks().iter().zip(&t.components).enumerate() {
        let nodes: Vec<usize> = (0..grid.len()).filter(|&k| disk.contains(grid.node_at(k))).collect();
        let zetas: Vec<Complex64> = nodes.iter().map(|&k| (grid.node_at(k) - disk.center()) / disk.r).collect();
        let sigma = sigma_at(phi, &zetas, 0.5 * grid.spacing() / disk.r)
            .map_err(|e| Error::Component { component: i, source: Box::new(e) })?;
        for (k, v) in nodes.into_iter().zip(sigma) {
            values[k] = v;
        }
        reach = reach.max(disk.center().norm() + disk.r);
    }
    BeltramiField::new(GridField::new(grid, values)?, reach.min(grid.support_radius()))
}

/// Upper bound `½ log K(μ)` for the Teichmüller distance from the basepoint to the class of `μ`.
pub fn teich_distance_bound(mu: &BeltramiField) -> f64 {
    0.5 * mu.dilatation().ln()
}

/// `g(E)` as a set model, and `α` with `g(S_i) = S̃_{α(i)}`.
pub fn image_set(set: &SetModel, g: &MoebiusTransform) -> Result<(SetModel, Vec<usize>)> {
    require_disks(set)?;
    let inv = g.inverse();
    for p in [SpherePoint::new(0.0, 0.0), SpherePoint::new(1.0, 0.0), SpherePoint::Infinity] {
        if let SpherePoint::Finite(z) = inv.apply(p) {
            if set.disk_index(z).is_some() {
                return Err(Error::invalid(format!("{p} does not lie in g(E)")));
            }
        }
    }
    let images = set
        .disks()
        .iter()
        .map(|d| match (g.is_affine(), g.apply_finite(d.center())) {
            (true, Some(c)) => Ok((c, g.derivative(d.center())?.norm() * d.r)),
            _ => g.map_disk(d.center(), d.r),
        })
        .collect::<Result<Vec<_>>>()?;
    let tilde = SetModel::disk_complement(images.iter().map(|&(c, r)| Disk::new(c, r)).collect())?;
    let alpha = images
        .iter()
        .map(|&(c, r)| tilde.find_disk(c, r, 1e-9 * (1.0 + c.norm())).expect("image disk is in the image set"))
        .collect();
    Ok((tilde, alpha))
}

/// Grid for `g_*`-images: affine maps scale the half width by `|a|` and shift it by `|b|`.
pub fn target_grid(grid: ComplexGrid, g: &MoebiusTransform) -> Result<ComplexGrid> {
    if !g.is_affine() {
        return Ok(grid);
    }
    let a = g.derivative(ZERO)?.norm();
    let b = g.apply_finite(ZERO).unwrap_or(ZERO).norm();
    // round off matrix-normalization noise so that node images line up exactly
    let half_width = ((grid.half_width() * a.max(1.0) + 2.0 * b) * 1e9).round() / 1e9;
    ComplexGrid::new(half_width, grid.n())
}

#[derive(Debug, Clone)]
pub struct GAction {
    pub nu: BeltramiField,
    pub set: SetModel,
    pub alpha: Vec<usize>,
    /// `ĝ`, making `ĝ ∘ w^μ ∘ g⁻¹` fix `0, 1, ∞`.
    pub normalizer: MoebiusTransform,
}

/// `F_g([w^μ]_E) = [ĝ ∘ w^μ ∘ g⁻¹]_{g(E)}`; `ν` is the coefficient of the composite.
pub fn f_g_action(mu: &BeltramiField, g: &MoebiusTransform, set: &SetModel) -> Result<GAction> {
    let (tilde, alpha) = image_set(set, g)?;
    let w = solve_normalized(mu)?;
    let inv = g.inverse();
    let images = [SpherePoint::new(0.0, 0.0), SpherePoint::new(1.0, 0.0), SpherePoint::Infinity]
        .map(|p| w.evaluate(inv.apply(p)));
    let normalizer = MoebiusTransform::normalizer_fixing_triple(images[0], images[1], images[2])?;
    let target = target_grid(*mu.grid(), g)?;
    let samples: Vec<Complex64> = (0..target.len())
        .into_par_iter()
        .map(|i| {
            let z = inv.apply(target.node_at(i).into());
            match normalizer.apply(w.evaluate(z)) {
                SpherePoint::Finite(v) => Ok(v),
                SpherePoint::Infinity => Err(Error::domain(format!("composite has a pole at node {i}"))),
            }
        })
        .collect::<Result<_>>()?;
    let nu = beltrami_of(&GridField::new(target, samples)?)?;
    Ok(GAction { nu, set: tilde, alpha, normalizer })
}

/// `(ρ_g)_i`: transports the trace of component `i` of `E` to component `α(i)` of `g(E)`
/// through the disk automorphism `B = Ã_{α(i)}⁻¹ ∘ g ∘ A_i`, then renormalizes.
pub fn rho_transport(
    phi: &CircleHomeo,
    g: &MoebiusTransform,
    source: &Disk,
    target: &Disk,
) -> Result<CircleHomeo> {
    let b = target.chart().inverse().compose(g).compose(&source.chart());
    phi.conjugated(&b.inverse(), &MoebiusTransform::identity())?.renormalized()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremAReport {
    /// `sup |g_*(μ|E) - ν|` over the nodes of `g(E)`.
    pub beltrami_residual: f64,
    /// Per component `i` of `E`: trace of `α(i)` against the transported trace of `i`.
    pub component_residuals: Vec<f64>,
    pub alpha: Vec<usize>,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn theorem_a_residual(mu: &BeltramiField, g: &MoebiusTransform, set: &SetModel, tol: f64) -> Result<TheoremAReport> {
    let action = f_g_action(mu, g, set)?;
    let t = project_tilde(mu, set)?;
    let t_tilde = project_tilde(&action.nu, &action.set)?;
    let pushed = pushforward_onto(&restrict_to_set(mu, set)?, g, *action.nu.grid())?;
    let grid = *action.nu.grid();
    let beltrami_residual = (0..grid.len())
        .filter(|&i| action.set.contains(grid.node_at(i)))
        .map(|i| (pushed.values()[i] - action.nu.values()[i]).norm())
        .fold(0.0, f64::max);
    let component_residuals = set
        .disks()
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let j = action.alpha[i];
            let moved = rho_transport(&t.components[i], g, d, &action.set.disks()[j])?;
            t_tilde.components[j].sup_angular_distance(&moved)
        })
        .collect::<Result<Vec<_>>>()?;
    let pass = beltrami_residual < tol && component_residuals.iter().all(|&r| r < tol);
    Ok(TheoremAReport { beltrami_residual, component_residuals, alpha: action.alpha, tolerance: tol, pass })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    /// `max_g sup |(μ∘g)·conj(g')/g' - μ|`.
    pub mu_residual: f64,
    /// `max_g` Lieb distance between `t` and `F_g(t)`.
    pub teich_residual: f64,
    /// `max_g` invariance residual of `s(t)`.
    pub section_residual: f64,
    pub tolerance: f64,
    pub mu_invariant: bool,
    pub teich_fixed: bool,
    pub section_invariant: bool,
}

/// Checks `μ ∈ M(ℂ)^G`, `t ∈ T(E)^G` and `s(t) ∈ M(ℂ)^G` for a list `G` of maps with `g(E) = E`.
pub fn g_invariance_check(
    mu: &BeltramiField,
    group: &[MoebiusTransform],
    set: &SetModel,
    tol: f64,
) -> Result<InvarianceReport> {
    let mut actions = Vec::with_capacity(group.len());
    for g in group {
        let (tilde, alpha) = image_set(set, g)?;
        let same = tilde.disks().iter().zip(set.disks()).all(|(a, b)| {
            (a.center() - b.center()).norm() < 1e-9 * (1.0 + b.center().norm()) && (a.r - b.r).abs() < 1e-9 * b.r
        });
        if !same {
            return Err(Error::invalid("g(E) differs from E"));
        }
        actions.push(alpha);
    }
    let t = project_tilde(mu, set)?;
    let s = de_section(&t)?;
    let grid = *mu.grid();
    let mut report = InvarianceReport {
        mu_residual: 0.0,
        teich_residual: 0.0,
        section_residual: 0.0,
        tolerance: tol,
        mu_invariant: false,
        teich_fixed: false,
        section_invariant: false,
    };
    for (g, alpha) in group.iter().zip(&actions) {
        report.mu_residual = report.mu_residual.max(invariance_residual(mu, g));
        report.section_residual = report.section_residual.max(invariance_residual(&s, g));
        for (i, d) in set.disks().iter().enumerate() {
            let moved = rho_transport(&t.components[i], g, d, &set.disks()[alpha[i]])?;
            report.teich_residual = report.teich_residual.max(t.components[alpha[i]].sup_angular_distance(&moved)?);
        }
        let pushed = pushforward_onto(&t.mu_on_set, g, grid)?;
        let field = (0..grid.len())
            .filter(|&i| set.contains(grid.node_at(i)))
            .map(|i| (pushed.values()[i] - t.mu_on_set.values()[i]).norm())
            .fold(0.0, f64::max);
        report.teich_residual = report.teich_residual.max(field);
    }
    report.mu_invariant = report.mu_residual < tol;
    report.teich_fixed = report.teich_residual < tol;
    report.section_invariant = report.section_residual < tol;
    Ok(report)
}

/// `Ĉ ∖ (D(-4, 1) ∪ D(4, 1))`.
pub fn two_disk_set() -> SetModel {
    SetModel::disk_complement(vec![Disk::new(Complex64::new(-4.0, 0.0), 1.0), Disk::new(Complex64::new(4.0, 0.0), 1.0)])
        .expect("separated disks")
}

/// Grid holding coefficients of the two-disk scenario (half width 12, `N = 512`).
pub fn scenario_grid() -> ComplexGrid {
    ComplexGrid::new(12.0, 512).expect("valid grid")
}

/// Random smooth coefficient with a bump inside each disk of `set` and a few bumps
/// near the origin, optionally made invariant under the affine maps `symmetries`
/// (closed under composition), with sup norm exactly `norm`.
pub fn scenario_field<R: Rng>(
    rng: &mut R,
    grid: ComplexGrid,
    set: &SetModel,
    norm: f64,
    symmetries: &[MoebiusTransform],
) -> Result<BeltramiField> {
    let mut bumps: Vec<Bump> = set
        .disks()
        .iter()
        .map(|d| {
            let offset = Complex64::from_polar(0.3 * d.r * rng.gen::<f64>(), rng.gen_range(0.0..std::f64::consts::TAU));
            let amplitude = Complex64::from_polar(rng.gen_range(0.5..1.0), rng.gen_range(0.0..std::f64::consts::TAU));
            // kept clear of ∂D so μ∘A has no jump across S¹
            Bump { center: d.center() + offset, radius: (d.r - offset.norm()) * rng.gen_range(0.6..0.85), amplitude }
        })
        .collect();
    // wide enough (>= 12 grid spacings) for the finite-difference coefficient of w∘g⁻¹
    bumps.extend((0..2).map(|_| {
        let center = Complex64::from_polar(1.5 * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..std::f64::consts::TAU));
        let amplitude = Complex64::from_polar(rng.gen_range(0.3..1.0), rng.gen_range(0.0..std::f64::consts::TAU));
        Bump { center, radius: rng.gen_range(0.6..1.0), amplitude }
    }));
    if !symmetries.is_empty() {
        let base = bumps.clone();
        for g in symmetries {
            for b in &base {
                bumps.push(b.pushed(g)?);
            }
        }
    }
    scaled_bumps_field(grid, bumps, norm)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn image_set_of_negation_swaps_components() {
        let set = two_disk_set();
        let neg = MoebiusTransform::affine(Complex64::new(-1.0, 0.0), ZERO).unwrap();
        let (tilde, alpha) = image_set(&set, &neg).unwrap();
        assert_eq!(tilde, set);
        assert_eq!(alpha, vec![1, 0]);
        let double = MoebiusTransform::affine(Complex64::new(2.0, 0.0), ZERO).unwrap();
        let (tilde, alpha) = image_set(&set, &double).unwrap();
        assert_eq!(tilde.find_disk(Complex64::new(8.0, 0.0), 2.0, 1e-12), Some(1));
        assert_eq!(alpha, vec![0, 1]);
        assert_eq!(target_grid(scenario_grid(), &double).unwrap().half_width(), 24.0);
    }

    #[test]
    fn image_set_requires_normalization_points() {
        let set = two_disk_set();
        let shift = MoebiusTransform::affine(Complex64::new(1.0, 0.0), Complex64::new(-4.0, 0.0)).unwrap();
        assert!(image_set(&set, &shift).is_err());
    }

    #[test]
    fn rho_transport_of_identity_trace() {
        let set = two_disk_set();
        let neg = MoebiusTransform::affine(Complex64::new(-1.0, 0.0), ZERO).unwrap();
        let id = CircleHomeo::identity(256);
        let moved = rho_transport(&id, &neg, &set.disks()[0], &set.disks()[1]).unwrap();
        assert!(moved.sup_angular_distance(&id).unwrap() < 1e-12);
    }

    #[test]
    fn symmetric_scenario_fields_are_invariant() {
        use rand_chacha::rand_core::SeedableRng;
        let grid = ComplexGrid::new(12.0, 128).unwrap();
        let neg = MoebiusTransform::affine(Complex64::new(-1.0, 0.0), ZERO).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mu = scenario_field(&mut rng, grid, &two_disk_set(), 0.3, &[neg]).unwrap();
        assert!((mu.sup_norm() - 0.3).abs() < 1e-12);
        assert!(invariance_residual(&mu, &neg) < 1e-12);
    }
}
