//! The acceptance battery: thirteen property and oracle checks grouped into suites.
//!
//! Each check returns a [`CriterionResult`] with its measured quantities. Results are
//! deterministic for a fixed [`VerifyOptions`] except for `elapsed`, which is not serialized.

use crate::beltrami::{BeltramiField, Disk, SetModel};
use crate::circle::CircleHomeo;
use crate::douady_earle::{
    circle_map_from_mu, disk_sample, naturality_residual, sigma_of_trace, Extender, BOUNDARY_SAMPLES,
};
use crate::error::{Error, Result};
use crate::fields::{random_field, Bump, FieldSpec};
use crate::grid::ComplexGrid;
use crate::jordan::{mu_continuity_probe, theorem_c_report, ExtensionOptions, JordanCurve, Representative};
use crate::lieb::{
    de_section, g_invariance_check, lieb_distance, project_tilde, scenario_field, scenario_grid, theorem_a_residual,
    two_disk_set,
};
use crate::moebius::MoebiusTransform;
use crate::motions::{
    forget_points, kobayashi_bound, maximal_example_motion, motion_holomorphy_probe, motion_injectivity_check,
    poincare_distance_from_origin, trace_map, wtmu_motion, WtmuFamily,
};
use crate::solver::{holomorphy_probe, solve_normalized, SolverOptions};
use crate::sphere::SpherePoint;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Solver,
    DouadyEarle,
    Lieb,
    Motions,
    Jordan,
    All,
}

impl Suite {
    pub fn criteria(self) -> &'static [u32] {
        match self {
            Suite::Solver => &[1, 2, 3, 4],
            Suite::DouadyEarle => &[5, 6, 7],
            Suite::Lieb => &[8, 9],
            Suite::Motions => &[10, 11, 13],
            Suite::Jordan => &[12],
            Suite::All => &[1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Suite::Solver => "solver",
            Suite::DouadyEarle => "douady-earle",
            Suite::Lieb => "lieb",
            Suite::Motions => "motions",
            Suite::Jordan => "jordan",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Suite::Solver, Suite::DouadyEarle, Suite::Lieb, Suite::Motions, Suite::Jordan, Suite::All]
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Grid for the solver, disk and motion checks. The two-disk scenario keeps its own grid.
    pub grid: ComplexGrid,
    /// Multiplies every tolerance (exactness clauses excepted).
    pub tol_scale: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { seed: 7, grid: ComplexGrid::standard(), tol_scale: 1.0 }
    }
}

impl VerifyOptions {
    fn tol(&self, t: f64) -> f64 {
        t * self.tol_scale
    }

    fn rng(&self, id: u32) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed.wrapping_mul(1000).wrapping_add(id as u64))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub pass: bool,
    pub metrics: Value,
    /// Set when a routine failed outright instead of producing a residual.
    pub error: Option<String>,
    #[serde(skip)]
    pub elapsed: f64,
}

impl CriterionResult {
    /// One-line summary, `PASS 3 radial stretch: ...`.
    pub fn line(&self) -> String {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        match &self.error {
            Some(e) => format!("{verdict} {:>2} {}: error: {e}", self.id, self.name),
            None => format!("{verdict} {:>2} {}: {}", self.id, self.name, self.metrics),
        }
    }
}

pub fn criterion_name(id: u32) -> &'static str {
    match id {
        1 => "solver identity",
        2 => "solver round trip",
        3 => "radial stretch",
        4 => "holomorphy in mu",
        5 => "moebius reproduction",
        6 => "conformal naturality",
        7 => "section identities",
        8 => "theorem a",
        9 => "invariance",
        10 => "maximal example",
        11 => "norm bound",
        12 => "theorem c pipeline",
        13 => "forgetful compatibility",
        _ => "unknown",
    }
}

/// Runs one criterion; a routine error becomes a failing result carrying the message.
pub fn run_criterion(id: u32, opts: &VerifyOptions) -> CriterionResult {
    let start = Instant::now();
    let outcome = match id {
        1 => solver_identity(opts),
        2 => solver_round_trip(opts),
        3 => radial_stretch(opts),
        4 => holomorphy_in_mu(opts),
        5 => moebius_reproduction(opts),
        6 => conformal_naturality(opts),
        7 => section_identities(opts),
        8 => theorem_a(opts),
        9 => invariance(opts),
        10 => maximal_example(opts),
        11 => norm_bound(opts),
        12 => theorem_c(opts),
        13 => forgetful(opts),
        _ => Err(Error::InvalidArgument(format!("no criterion {id}"))),
    };
    let elapsed = start.elapsed().as_secs_f64();
    let name = criterion_name(id).to_string();
    match outcome {
        Ok((pass, metrics)) => CriterionResult { id, name, pass, metrics, error: None, elapsed },
        Err(e) => CriterionResult { id, name, pass: false, metrics: Value::Null, error: Some(e.to_string()), elapsed },
    }
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Vec<CriterionResult> {
    suite.criteria().iter().map(|&id| run_criterion(id, opts)).collect()
}

type Outcome = Result<(bool, Value)>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn sup<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

fn decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn spiral(radius: f64, count: usize) -> Vec<Complex64> {
    (0..count)
        .map(|t| {
            let s = (t as f64 + 0.5) / count as f64;
            Complex64::from_polar(radius * s.sqrt(), 2.399_963 * t as f64)
        })
        .collect()
}

fn bump_profile(r2: f64) -> f64 {
    if r2 < 1.0 {
        (1.0 - 1.0 / (1.0 - r2)).exp()
    } else {
        0.0
    }
}

fn smooth_mu(grid: ComplexGrid) -> Result<BeltramiField> {
    BeltramiField::from_fn(grid, 2.0, |z| {
        c(0.35, 0.1) * bump_profile((z - c(0.3, 0.2)).norm_sqr() / 2.25) + c(-0.1, 0.25) * bump_profile((z + c(0.5, 0.6)).norm_sqr())
    })
}

fn refinement(grid: &ComplexGrid, half_width: f64) -> Result<Vec<ComplexGrid>> {
    let n = grid.n();
    [n / 4, n / 2, n].iter().map(|&m| ComplexGrid::new(half_width, m)).collect()
}

fn solver_identity(opts: &VerifyOptions) -> Outcome {
    let start = Instant::now();
    let w = solve_normalized(&BeltramiField::zero(opts.grid))?;
    let seconds = start.elapsed().as_secs_f64();
    let grid = opts.grid;
    let err = sup((0..grid.len()).map(|i| (w.samples().values()[i] - grid.node_at(i)).norm()));
    let pass = err < opts.tol(1e-12) && seconds < 1.0;
    Ok((pass, json!({ "sup_error": err, "under_one_second": seconds < 1.0 })))
}

// F(z) = z + 0.1 exp(-|z|²) normalized by F(0), F(1).
fn gaussian_errors(grids: &[ComplexGrid]) -> Result<Vec<f64>> {
    let f = |z: Complex64| z + 0.1 * (-z.norm_sqr()).exp();
    let (f0, f1) = (f(c(0.0, 0.0)), f(c(1.0, 0.0)));
    let mu = |z: Complex64| {
        let e = (-z.norm_sqr()).exp();
        (-0.1 * z * e) / (1.0 - 0.1 * z.conj() * e)
    };
    let points = spiral(2.0, 400);
    grids
        .iter()
        .map(|&grid| {
            let w = solve_normalized(&BeltramiField::from_fn(grid, grid.support_radius(), mu)?)?;
            Ok(sup(points.iter().map(|&z| (w.eval(z) - (f(z) - f0) / (f1 - f0)).norm())))
        })
        .collect()
}

fn solver_round_trip(opts: &VerifyOptions) -> Outcome {
    let l = opts.grid.half_width();
    let errors = gaussian_errors(&refinement(&opts.grid, l)?)?;
    // on twice the width the truncated tail of μ no longer floors the error
    let wide = gaussian_errors(&refinement(&opts.grid, 2.0 * l)?)?;
    let orders: Vec<f64> = wide.windows(2).map(|e| (e[0] / e[1]).log2()).collect();
    let pass = errors[2] < opts.tol(1e-3) && decreasing(&errors) && orders.iter().all(|&o| o >= 1.0);
    Ok((pass, json!({ "errors": errors, "wide_errors": wide, "orders": orders })))
}

fn radial_stretch(opts: &VerifyOptions) -> Outcome {
    let mu = |z: Complex64| if z.norm() < 1.0 && z.norm() > 0.0 { (z / z.conj()) / 3.0 } else { c(0.0, 0.0) };
    let exact = |z: Complex64| if z.norm() < 1.0 { z * z.norm() } else { z };
    let points = spiral(3.0, 600);
    let mut errors = Vec::new();
    let mut dilatation = 0.0;
    for grid in refinement(&opts.grid, opts.grid.half_width())? {
        let field = BeltramiField::from_fn(grid, 1.0, mu)?;
        dilatation = field.dilatation();
        let w = solve_normalized(&field)?;
        errors.push(sup(points.iter().map(|&z| (w.eval(z) - exact(z)).norm())));
    }
    let pass = errors[2] < opts.tol(2e-2) && decreasing(&errors) && (dilatation - 2.0).abs() < 1e-12;
    Ok((pass, json!({ "errors": errors, "dilatation": dilatation })))
}

fn holomorphy_in_mu(opts: &VerifyOptions) -> Outcome {
    let mu0 = smooth_mu(opts.grid)?;
    let mu0 = mu0.scaled(c(0.999 / mu0.sup_norm(), 0.0))?;
    let points = spiral(2.5, 10);
    let steps = [1e-2, 5e-3, 2.5e-3];
    let so = SolverOptions::default();
    let report = holomorphy_probe(|l| mu0.scaled(l), &points, c(0.2, 0.0), &steps, &so)?;
    let min_order = report.orders.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let anti = holomorphy_probe(|l| mu0.scaled(l.conj()), &points[..3], c(0.2, 0.0), &steps, &so)?;
    let min_anti = anti.residuals.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let pass = min_order >= 1.8 && min_anti >= 1e-3;
    Ok((pass, json!({ "min_order": min_order, "min_antiholomorphic_residual": min_anti })))
}

fn random_automorphism<R: Rng>(rng: &mut R, max_radius: f64) -> Result<MoebiusTransform> {
    let p = Complex64::from_polar(max_radius * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..TAU));
    MoebiusTransform::disk_automorphism(rng.gen_range(0.0..TAU), p)
}

fn moebius_reproduction(opts: &VerifyOptions) -> Outcome {
    let mut rng = opts.rng(5);
    let points = disk_sample(100, 0.95);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let h = random_automorphism(&mut rng, 0.8)?;
        let trace = CircleHomeo::from_moebius(&h, BOUNDARY_SAMPLES)?;
        let ext = Extender::new(&trace);
        for &z in &points {
            let exact = h.apply_finite(z).ok_or_else(|| Error::domain("automorphism pole inside the disk"))?;
            worst = worst.max((ext.extend(z)? - exact).norm());
        }
    }
    let id = CircleHomeo::identity(BOUNDARY_SAMPLES);
    let ext = Extender::new(&id);
    let mut identity: f64 = 0.0;
    for z in disk_sample(200, 0.999) {
        identity = identity.max((ext.extend(z)? - z).norm());
    }
    let pass = worst < opts.tol(1e-8) && identity < opts.tol(1e-12);
    Ok((pass, json!({ "moebius_error": worst, "identity_error": identity })))
}

fn conformal_naturality(opts: &VerifyOptions) -> Outcome {
    let mut rng = opts.rng(6);
    let points = disk_sample(200, 0.9);
    let region = Disk::new(c(0.0, 0.0), 0.9);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let norm = rng.gen_range(0.1..0.5);
        let phi = circle_map_from_mu(&random_field(opts.grid, &mut rng, 3, &region, norm)?)?;
        for _ in 0..5 {
            let g = random_automorphism(&mut rng, 0.5)?;
            let h = random_automorphism(&mut rng, 0.5)?;
            worst = worst.max(naturality_residual(&phi, &g, &h, &points)?);
        }
    }
    Ok((worst < opts.tol(1e-6), json!({ "trials": 50, "naturality_residual": worst })))
}

fn section_identities(opts: &VerifyOptions) -> Outcome {
    let mut rng = opts.rng(7);
    let disk_mu = FieldSpec::Bumps {
        bumps: vec![
            Bump { center: c(0.2, 0.3), radius: 0.6, amplitude: c(0.3, -0.2) },
            Bump { center: c(-0.4, -0.2), radius: 0.5, amplitude: c(-0.1, 0.25) },
        ],
    }
    .build(opts.grid)?;
    let phi = circle_map_from_mu(&disk_mu)?;
    let s = sigma_of_trace(&phi, opts.grid)?;
    let trace_residual = circle_map_from_mu(&s)?.sup_angular_distance(&phi)?;

    let set = two_disk_set();
    let grid = scenario_grid();
    let mut round_trip: f64 = 0.0;
    for _ in 0..20 {
        let t = project_tilde(&scenario_field(&mut rng, grid, &set, 0.4, &[])?, &set)?;
        let back = project_tilde(&de_section(&t)?, &set)?;
        round_trip = round_trip.max(lieb_distance(&back, &t)?.max());
    }
    let direction = scenario_field(&mut rng, grid, &set, 0.5, &[])?;
    let mut norms = Vec::new();
    for k in [0.1, 0.3, 0.5, 0.7] {
        let mu = direction.scaled(c(k / 0.5, 0.0))?;
        norms.push(de_section(&project_tilde(&mu, &set)?)?.sup_norm());
    }
    let pass = trace_residual < opts.tol(5e-3) && round_trip < opts.tol(5e-3) && s.sup_norm() < 1.0 && norms.iter().all(|&n| n < 1.0);
    Ok((
        pass,
        json!({
            "trace_residual": trace_residual,
            "round_trip_residual": round_trip,
            "sigma_norm": s.sup_norm(),
            "c_of_k": { "0.1": norms[0], "0.3": norms[1], "0.5": norms[2], "0.7": norms[3] },
        }),
    ))
}

fn theorem_a(opts: &VerifyOptions) -> Outcome {
    let start = Instant::now();
    let mut rng = opts.rng(8);
    let set = two_disk_set();
    let grid = scenario_grid();
    let tol = opts.tol(5e-3);
    let maps = [("negation", MoebiusTransform::affine(c(-1.0, 0.0), c(0.0, 0.0))?), ("doubling", MoebiusTransform::affine(c(2.0, 0.0), c(0.0, 0.0))?)];
    let mut pass = true;
    let mut metrics = serde_json::Map::new();
    for (name, g) in &maps {
        let (mut beltrami, mut component): (f64, f64) = (0.0, 0.0);
        for _ in 0..10 {
            let mu = scenario_field(&mut rng, grid, &set, 0.3, &[])?;
            let r = theorem_a_residual(&mu, g, &set, tol)?;
            pass &= r.pass;
            beltrami = beltrami.max(r.beltrami_residual);
            component = component.max(sup(r.component_residuals));
        }
        metrics.insert(name.to_string(), json!({ "beltrami_residual": beltrami, "component_residual": component }));
    }
    let minutes = start.elapsed().as_secs_f64() / 60.0;
    metrics.insert("under_five_minutes".into(), json!(minutes < 5.0));
    Ok((pass && minutes < 5.0, Value::Object(metrics)))
}

fn invariance(opts: &VerifyOptions) -> Outcome {
    let mut rng = opts.rng(9);
    let set = two_disk_set();
    let grid = scenario_grid();
    let tol = opts.tol(5e-3);
    let group = [MoebiusTransform::identity(), MoebiusTransform::affine(c(-1.0, 0.0), c(0.0, 0.0))?];
    let (mut symmetric_pass, mut controls_fail) = (true, true);
    let (mut symmetric_worst, mut control_least): (f64, f64) = (0.0, f64::INFINITY);
    for _ in 0..3 {
        let sym = scenario_field(&mut rng, grid, &set, 0.3, &group[1..])?;
        let r = g_invariance_check(&sym, &group, &set, tol)?;
        symmetric_pass &= r.mu_invariant && r.teich_fixed && r.section_invariant;
        symmetric_worst = symmetric_worst.max(r.mu_residual).max(r.teich_residual).max(r.section_residual);
        let skew = scenario_field(&mut rng, grid, &set, 0.3, &[])?;
        let r = g_invariance_check(&skew, &group, &set, tol)?;
        controls_fail &= !r.mu_invariant && !r.section_invariant;
        control_least = control_least.min(r.mu_residual.min(r.section_residual));
    }
    Ok((
        symmetric_pass && controls_fail,
        json!({ "symmetric_residual": symmetric_worst, "control_residual": control_least, "controls_fail": controls_fail }),
    ))
}

fn maximal_example(opts: &VerifyOptions) -> Outcome {
    let mut rng = opts.rng(10);
    let phi = maximal_example_motion();
    let x0 = phi.domain().basepoint();
    let basepoint_exact = phi.images(&x0)? == phi.set().points();
    let (mut injective, mut disjoint) = (true, true);
    let mut margin = f64::INFINITY;
    for _ in 0..100 {
        let u: f64 = rng.gen_range(0.02..0.98);
        let alpha = c(rng.gen_range(-3.0..3.0), -u.ln());
        let beta = Complex64::from_polar((1.0 - u) * rng.gen_range(0.0..0.999), rng.gen_range(0.0..TAU));
        let x = [alpha, beta];
        injective &= phi.domain().contains(&x) && motion_injectivity_check(&phi, &x)?;
        // |e^{iα}|·e·|z| + |β| at |z| = 1/e
        let reach = (c(0.0, 1.0) * alpha).exp().norm() + beta.norm();
        disjoint &= reach < 1.0;
        margin = margin.min(1.0 - reach);
    }
    let steps = [0.04, 0.02, 0.01];
    let base = [c(0.4, 1.2), c(0.1, 0.1)];
    let mut min_order = f64::INFINITY;
    for z in [SpherePoint::new(0.2, -0.1), SpherePoint::new(0.0, 0.3)] {
        let r = motion_holomorphy_probe(&phi, &base, 0, z, &steps)?;
        min_order = min_order.min(r.orders.iter().copied().fold(f64::INFINITY, f64::min));
    }
    let pass = basepoint_exact && injective && disjoint && min_order >= 1.8;
    Ok((
        pass,
        json!({ "basepoint_exact": basepoint_exact, "injective": injective, "disjointness_margin": margin, "min_order": min_order }),
    ))
}

fn marked_points() -> Result<SetModel> {
    SetModel::finite_points(vec![
        SpherePoint::new(0.0, 0.0),
        SpherePoint::new(1.0, 0.0),
        SpherePoint::Infinity,
        SpherePoint::new(0.5, 0.3),
        SpherePoint::new(-0.4, 0.6),
    ])
}

fn direction_field(grid: ComplexGrid) -> Result<BeltramiField> {
    FieldSpec::Bumps {
        bumps: vec![
            Bump { center: c(0.3, 0.2), radius: 0.8, amplitude: c(0.6, 0.3) },
            Bump { center: c(-0.5, -0.4), radius: 0.6, amplitude: c(-0.2, 0.5) },
        ],
    }
    .build(grid)
}

fn norm_bound(opts: &VerifyOptions) -> Outcome {
    let family = WtmuFamily::along(&direction_field(opts.grid)?)?;
    let mut excess = f64::NEG_INFINITY;
    let mut norms = Vec::new();
    for t in [0.1, 0.3, 0.5, 0.7] {
        let x = Complex64::from_polar(t, 0.7);
        let k = family.recovered_norm(x)?;
        excess = excess.max(k - kobayashi_bound(x));
        norms.push(k);
    }
    let mut rng = opts.rng(11);
    let mut identity: f64 = 0.0;
    for _ in 0..100 {
        let x = Complex64::from_polar(rng.gen_range(0.0..0.99), rng.gen_range(0.0..TAU));
        let e = (2.0 * poincare_distance_from_origin(x)).exp();
        identity = identity.max(((e - 1.0) / (e + 1.0) - x.norm()).abs());
    }
    let pass = excess <= opts.tol(2e-3) && identity < opts.tol(1e-12);
    Ok((pass, json!({ "recovered_norms": norms, "max_excess": excess, "identity_error": identity })))
}

fn theorem_c(opts: &VerifyOptions) -> Outcome {
    let start = Instant::now();
    let grid = opts.grid;
    let family = Arc::new(WtmuFamily::along(&direction_field(grid)?)?);
    let phi = wtmu_motion(family.clone(), marked_points()?)?;
    let p = SpherePoint::new;
    let corners = [SpherePoint::Infinity, p(-3.0, 0.0), p(-0.4, 0.6), p(0.0, 0.0), p(0.5, 0.3), p(1.0, 0.0), p(3.0, 0.0)];
    let gamma0 = JordanCurve::through(&corners, 16)?;
    let bumps = Representative::Bumps { grid, options: ExtensionOptions::default() };
    let solver = Representative::Solver(family);
    let mut pass = true;
    let mut rows = Vec::new();
    for t in [0.1, 0.3, 0.5] {
        let x = c(t, 0.0);
        let r = theorem_c_report(&phi, &gamma0, x, &bumps)?;
        let s = theorem_c_report(&phi, &gamma0, x, &solver)?;
        let probe = mu_continuity_probe(&phi, x, &[0.1, 0.05, 0.025], &bumps)?;
        let continuous = decreasing(&probe.increments);
        pass &= r.marked_residual < opts.tol(1e-6) && r.simple && continuous && s.pass;
        rows.push(json!({
            "x": t,
            "marked_residual": r.marked_residual,
            "simple": r.simple,
            "mu_norm": r.mu_norm,
            "bound": r.bound,
            "increments": probe.increments,
            "solver_mu_norm": s.mu_norm,
            "solver_pass": s.pass,
        }));
    }
    let minutes = start.elapsed().as_secs_f64() / 60.0;
    Ok((pass && minutes < 10.0, json!({ "reports": rows, "under_ten_minutes": minutes < 10.0 })))
}

fn forgetful(opts: &VerifyOptions) -> Outcome {
    let grid = ComplexGrid::new(opts.grid.half_width(), (opts.grid.n() / 4).max(32))?;
    let p = SpherePoint::new;
    let big = SetModel::finite_points(vec![p(0.0, 0.0), p(1.0, 0.0), SpherePoint::Infinity, p(2.0, 0.0), p(0.0, 3.0)])?;
    let small = SetModel::finite_points(vec![p(0.0, 0.0), p(1.0, 0.0), SpherePoint::Infinity, p(2.0, 0.0)])?;
    let mut rng = opts.rng(13);
    let mut exact = true;
    for _ in 0..20 {
        let mu0 = random_field(grid, &mut rng, 2, &Disk::new(c(0.0, 0.0), 1.5), 0.5)?;
        let phi = wtmu_motion(Arc::new(WtmuFamily::along(&mu0)?), big.clone())?;
        let x = [Complex64::from_polar(rng.gen_range(0.0..0.8), rng.gen_range(0.0..TAU))];
        let forgotten = forget_points(&trace_map(&phi, &x)?, &small)?;
        exact &= forgotten == trace_map(&phi.restricted(&small)?, &x)?;
    }
    Ok((exact, json!({ "motions": 20, "exact": exact })))
}
