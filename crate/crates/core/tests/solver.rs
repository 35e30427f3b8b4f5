use num_complex::Complex64;
use qclab::beltrami::BeltramiField;
use qclab::grid::{ComplexGrid, GridField};
use qclab::solver::{beltrami_of, holomorphy_probe, solve_normalized, solve_with, SolverOptions};
use qclab::sphere::SpherePoint;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

// F(z) = z + 0.1 exp(-|z|^2), normalized as G = (F - F(0)) / (F(1) - F(0)).
// F_zbar = -0.1 z exp(-|z|^2), F_z = 1 - 0.1 zbar exp(-|z|^2).
fn gaussian_oracle() -> (impl Fn(Complex64) -> Complex64, impl Fn(Complex64) -> Complex64) {
    let f = |z: Complex64| z + 0.1 * (-z.norm_sqr()).exp();
    let (f0, f1) = (f(c(0.0, 0.0)), f(c(1.0, 0.0)));
    let g = move |z: Complex64| (f(z) - f0) / (f1 - f0);
    let mu = |z: Complex64| {
        let e = (-z.norm_sqr()).exp();
        (-0.1 * z * e) / (1.0 - 0.1 * z.conj() * e)
    };
    (g, mu)
}

fn disk_samples(radius: f64, count: usize) -> Vec<Complex64> {
    (0..count)
        .map(|t| {
            let s = (t as f64 + 0.5) / count as f64;
            Complex64::from_polar(radius * s.sqrt(), 2.399_963 * t as f64)
        })
        .collect()
}

fn gaussian_errors(half_width: f64) -> Vec<f64> {
    let (g, mu) = gaussian_oracle();
    [128usize, 256, 512]
        .iter()
        .map(|&n| {
            let grid = ComplexGrid::new(half_width, n).unwrap();
            let field = BeltramiField::from_fn(grid, grid.support_radius(), &mu).unwrap();
            let w = solve_normalized(&field).unwrap();
            disk_samples(2.0, 400).iter().map(|&z| (w.eval(z) - g(z)).norm()).fold(0.0, f64::max)
        })
        .collect()
}

#[test]
fn gaussian_round_trip_at_defaults() {
    let errors = gaussian_errors(4.0);
    assert!(errors[2] < 1e-3, "errors {errors:?}");
    assert!(errors[1] < errors[0] && errors[2] < errors[1], "errors {errors:?}");
}

#[test]
fn gaussian_round_trip_refinement_order() {
    // On L = 4 the coefficient is cut at |z| = 2 where it is still ~4e-3, which
    // floors the error near 3e-5; on L = 8 the cut is below 1e-13.
    let errors = gaussian_errors(8.0);
    for e in errors.windows(2) {
        assert!((e[0] / e[1]).log2() >= 1.0, "errors {errors:?}");
    }
}

#[test]
fn radial_stretch_oracle() {
    let mu = |z: Complex64| if z.norm() < 1.0 && z.norm() > 0.0 { (z / z.conj()) / 3.0 } else { c(0.0, 0.0) };
    let exact = |z: Complex64| if z.norm() < 1.0 { z * z.norm() } else { z };
    let mut errors = Vec::new();
    let mut at_half = 0.0;
    for n in [128usize, 256, 512] {
        let grid = ComplexGrid::new(4.0, n).unwrap();
        let field = BeltramiField::from_fn(grid, 1.0, mu).unwrap();
        assert!((field.dilatation() - 2.0).abs() < 1e-12);
        let w = solve_normalized(&field).unwrap();
        let err = disk_samples(3.0, 600).iter().map(|&z| (w.eval(z) - exact(z)).norm()).fold(0.0, f64::max);
        errors.push(err);
        at_half = (w.eval(c(0.5, 0.0)) - 0.25).norm();
    }
    assert!(errors[2] < 2e-2, "errors {errors:?}");
    assert!(errors[1] < errors[0] && errors[2] < errors[1], "errors {errors:?}");
    assert!(at_half < 2e-2, "w(0.5) error {at_half:.3e}");
}

fn smooth_mu(grid: ComplexGrid) -> BeltramiField {
    BeltramiField::from_fn(grid, 2.0, |z| {
        let bump = |r2: f64| if r2 < 1.0 { (1.0 - 1.0 / (1.0 - r2)).exp() } else { 0.0 };
        c(0.35, 0.1) * bump((z - c(0.3, 0.2)).norm_sqr() / 2.25) + c(-0.1, 0.25) * bump((z + c(0.5, 0.6)).norm_sqr())
    })
    .unwrap()
}

#[test]
fn beltrami_of_inverts_solver() {
    let grid = ComplexGrid::standard();
    let mu = smooth_mu(grid);
    let w = solve_normalized(&mu).unwrap();
    let back = beltrami_of(w.samples()).unwrap();
    let err = (0..grid.len())
        .filter(|&i| grid.node_at(i).norm() < 1.9)
        .map(|i| (back.values()[i] - mu.values()[i]).norm())
        .fold(0.0, f64::max);
    assert!(err < 5e-3, "round-trip error {err:.3e}");
}

#[test]
fn independent_schedules_agree() {
    let grid = ComplexGrid::new(4.0, 256).unwrap();
    let mu = smooth_mu(grid);
    let a = solve_normalized(&mu).unwrap();
    let opts = SolverOptions { relaxation: 0.7, zero_start: true, ..SolverOptions::default() };
    let b = solve_with(&mu, &opts).unwrap();
    assert_ne!(a.report().iterations, b.report().iterations);
    let diff = a.samples().max_abs_diff(b.samples()).unwrap();
    assert!(diff < 1e-8, "schedules differ by {diff:.3e}");
}

#[test]
fn homeomorphism_proxies() {
    let grid = ComplexGrid::standard();
    let w = solve_normalized(&smooth_mu(grid)).unwrap();
    assert!(w.orientation_defects().is_empty());
    assert_eq!(w.eval(c(0.0, 0.0)), c(0.0, 0.0));
    assert!((w.eval(c(1.0, 0.0)) - 1.0).norm() < 1e-15);
    for z in disk_samples(3.5, 100) {
        let back = w.inverse_evaluate(w.evaluate(SpherePoint::Finite(z))).unwrap();
        assert!(back.chordal(SpherePoint::Finite(z)) < 1e-8);
    }
    // beyond the grid the far-field series takes over
    let far = c(12.0, -9.0);
    assert!((w.inverse(w.eval(far)).unwrap() - far).norm() < 1e-8);
}

#[test]
fn affine_family_dilatation() {
    let grid = ComplexGrid::standard();
    for k in [0.1, 0.4, 0.7] {
        let w = GridField::from_fn(grid, |z| (z + k * z.conj()) / (1.0 + k));
        let mu = beltrami_of(&w).unwrap();
        assert!((mu.dilatation() - (1.0 + k) / (1.0 - k)).abs() < 1e-6);
    }
}

#[test]
fn continuity_in_mu() {
    let grid = ComplexGrid::new(4.0, 256).unwrap();
    let mu = smooth_mu(grid);
    let w = solve_normalized(&mu).unwrap();
    let points = disk_samples(3.0, 200);
    let mut last = f64::INFINITY;
    for n in 1..=5 {
        let t = 1.0 + 0.5f64.powi(n);
        let wn = solve_normalized(&mu.scaled(c(t, 0.0)).unwrap()).unwrap();
        let d = points
            .iter()
            .map(|&z| SpherePoint::Finite(wn.eval(z)).chordal(SpherePoint::Finite(w.eval(z))))
            .fold(0.0, f64::max);
        assert!(d < last, "distance {d:.3e} did not decrease from {last:.3e}");
        last = d;
    }
}

#[test]
fn holomorphic_dependence_on_parameter() {
    let grid = ComplexGrid::standard();
    let mu0 = smooth_mu(grid);
    let mu0 = mu0.scaled(c(1.0 / mu0.sup_norm(), 0.0).scale(0.999)).unwrap();
    let points: Vec<Complex64> = disk_samples(2.5, 10);
    let steps = [1e-2, 5e-3, 2.5e-3];
    let opts = SolverOptions::default();
    let report = holomorphy_probe(|l| mu0.scaled(l), &points, c(0.2, 0.0), &steps, &opts).unwrap();
    for (p, orders) in report.orders.iter().enumerate() {
        for &o in orders {
            assert!(o >= 1.8, "order {o:.3} at {} (residuals {:?})", points[p], report.residuals[p]);
        }
    }
    let anti = holomorphy_probe(|l| mu0.scaled(l.conj()), &points[..3], c(0.2, 0.0), &steps, &opts).unwrap();
    for r in anti.residuals.iter().flatten() {
        assert!(*r >= 1e-3, "anti-holomorphic residual {r:.3e}");
    }
    let fixed = holomorphy_probe(|l| mu0.scaled(l), &[c(1.0, 0.0)], c(0.0, 0.0), &steps[..1], &opts).unwrap();
    assert!(fixed.residuals[0][0] < 1e-12);
}
