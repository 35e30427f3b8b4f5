use num_complex::Complex64;
use qclab::beltrami::{BeltramiField, Disk};
use qclab::circle::{normalizer, wrap, CircleHomeo};
use qclab::douady_earle::*;
use qclab::fields::{random_field, Bump, FieldSpec};
use qclab::grid::ComplexGrid;
use qclab::moebius::MoebiusTransform;
use qclab::solver::SolverOptions;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{PI, TAU};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn unit_region() -> Disk {
    Disk::new(c(0.0, 0.0), 0.9)
}

fn random_automorphism<R: Rng>(rng: &mut R, max_radius: f64) -> MoebiusTransform {
    let p = Complex64::from_polar(max_radius * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..TAU));
    MoebiusTransform::disk_automorphism(rng.gen_range(0.0..TAU), p).unwrap()
}

#[test]
fn moebius_traces_are_reproduced() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let points = disk_sample(100, 0.95);
    for _ in 0..20 {
        let h = random_automorphism(&mut rng, 0.8);
        let phi = CircleHomeo::from_moebius(&h, BOUNDARY_SAMPLES).unwrap();
        let ext = Extender::new(&phi);
        for &z in &points {
            let err = (ext.extend(z).unwrap() - h.apply_finite(z).unwrap()).norm();
            assert!(err < 1e-8, "error {err:.3e} at {z}");
        }
    }
    let id = CircleHomeo::identity(BOUNDARY_SAMPLES);
    let ext = Extender::new(&id);
    for z in disk_sample(200, 0.999) {
        assert!((ext.extend(z).unwrap() - z).norm() < 1e-12);
    }
}

#[test]
fn naturality_of_the_extension() {
    let id = CircleHomeo::identity(BOUNDARY_SAMPLES);
    let one = MoebiusTransform::identity();
    let points = disk_sample(200, 0.9);
    assert!(naturality_residual(&id, &one, &one, &points).unwrap() < 1e-12);
    let (r1, r2) = (
        MoebiusTransform::disk_automorphism(0.7, c(0.0, 0.0)).unwrap(),
        MoebiusTransform::disk_automorphism(-2.1, c(0.0, 0.0)).unwrap(),
    );
    assert!(naturality_residual(&id, &r1, &r2, &points).unwrap() < 1e-8);

    // ten coefficients, five Möbius pairs each
    let grid = ComplexGrid::standard();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let norm = rng.gen_range(0.1..0.5);
        let mu = random_field(grid, &mut rng, 3, &unit_region(), norm).unwrap();
        let phi = circle_map_from_mu(&mu).unwrap();
        for _ in 0..5 {
            let g = random_automorphism(&mut rng, 0.5);
            let h = random_automorphism(&mut rng, 0.5);
            worst = worst.max(naturality_residual(&phi, &g, &h, &points).unwrap());
        }
    }
    assert!(worst < 1e-6, "naturality residual {worst:.3e}");
}

#[test]
fn zero_coefficient_and_sigma_of_zero() {
    let grid = ComplexGrid::standard();
    let phi = circle_map_from_mu(&BeltramiField::zero(grid)).unwrap();
    assert!(phi.sup_angular_distance(&CircleHomeo::identity(BOUNDARY_SAMPLES)).unwrap() < 1e-12);
    let polar = sigma_polar(&phi, 64, 256).unwrap();
    assert!(polar.sup_norm() < 1e-10, "σ(0) = {:.3e}", polar.sup_norm());
}

fn smooth_disk_mu(grid: ComplexGrid) -> BeltramiField {
    FieldSpec::Bumps {
        bumps: vec![
            Bump { center: c(0.2, 0.3), radius: 0.6, amplitude: c(0.3, -0.2) },
            Bump { center: c(-0.4, -0.2), radius: 0.5, amplitude: c(-0.1, 0.25) },
        ],
    }
    .build(grid)
    .unwrap()
}

#[test]
fn interior_map_carries_mu() {
    let grid = ComplexGrid::standard();
    let mu = smooth_disk_mu(grid);
    let f = disk_map_from_mu(&mu, BOUNDARY_SAMPLES, &SolverOptions::default()).unwrap();
    assert!(f.circle_residual() < 1e-3);
    let h = 1e-3;
    for z in disk_sample(100, 0.85) {
        let dx = (f.eval(z + h) - f.eval(z - h)) / (2.0 * h);
        let dy = (f.eval(z + c(0.0, h)) - f.eval(z - c(0.0, h))) / (2.0 * h);
        let fz = 0.5 * (dx - c(0.0, 1.0) * dy);
        let fzbar = 0.5 * (dx + c(0.0, 1.0) * dy);
        let err = (fzbar / fz - mu.sample(z)).norm();
        assert!(err < 5e-3, "coefficient error {err:.3e} at {z}");
    }
}

#[test]
fn conjugation_symmetric_mu() {
    // μ(z̄) = conj μ(z) makes conj∘f∘conj another solution; it fixes ±1 but sends i to
    // conj(f(-i)), so the two agree up to the automorphism A with A(±1) = ±1, A(i) = conj(φ(-i)).
    let grid = ComplexGrid::standard();
    let b = Bump { center: c(0.3, 0.35), radius: 0.5, amplitude: c(0.25, 0.15) };
    let mirror = Bump { center: b.center.conj(), radius: b.radius, amplitude: b.amplitude.conj() };
    let mu = FieldSpec::Bumps { bumps: vec![b, mirror] }.build(grid).unwrap();
    let phi = circle_map_from_mu(&mu).unwrap();
    let i = c(0.0, 1.0);
    let a = normalizer(c(1.0, 0.0), phi.eval(-i).conj(), c(-1.0, 0.0)).unwrap().inverse();
    let mut worst: f64 = 0.0;
    for k in 0..360 {
        let z = Complex64::from_polar(1.0, TAU * k as f64 / 360.0);
        let lhs = phi.eval(z.conj()).conj();
        let rhs = a.apply_finite(phi.eval(z)).unwrap();
        worst = worst.max(wrap(lhs.arg() - rhs.arg()).abs());
    }
    assert!(worst < 1e-6, "symmetry residual {worst:.3e}");
    // the asymmetric control breaks it
    let skew = FieldSpec::Bumps { bumps: vec![b] }.build(grid).unwrap();
    let psi = circle_map_from_mu(&skew).unwrap();
    let a = normalizer(c(1.0, 0.0), psi.eval(-i).conj(), c(-1.0, 0.0)).unwrap().inverse();
    let z = Complex64::from_polar(1.0, 0.25 * PI);
    let gap = (psi.eval(z.conj()).conj() - a.apply_finite(psi.eval(z)).unwrap()).norm();
    assert!(gap > 1e-4, "asymmetric control residual {gap:.3e}");
}

#[test]
fn sigma_preserves_the_trace() {
    let grid = ComplexGrid::standard();
    let mu = smooth_disk_mu(grid);
    let phi = circle_map_from_mu(&mu).unwrap();
    let s = sigma_of_trace(&phi, grid).unwrap();
    assert!(s.sup_norm() < 1.0);
    let back = circle_map_from_mu(&s).unwrap();
    let err = back.sup_angular_distance(&phi).unwrap();
    assert!(err < 5e-3, "π∘σ residual {err:.3e}");
}

#[test]
fn sigma_norm_bound() {
    let grid = ComplexGrid::standard();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..20 {
        let mu = random_field(grid, &mut rng, 3, &unit_region(), 0.5).unwrap();
        let polar = sigma_polar(&circle_map_from_mu(&mu).unwrap(), 32, 128).unwrap();
        let sup = polar.sup_norm_within(POLAR_CUTOFF);
        assert!(sup <= 0.95, "‖σ‖ = {sup:.4}");
    }
    for k in [0.7, 0.9] {
        let mu = random_field(grid, &mut rng, 3, &unit_region(), k).unwrap();
        let sup = sigma_polar(&circle_map_from_mu(&mu).unwrap(), 32, 128).unwrap().sup_norm_within(POLAR_CUTOFF);
        assert!(sup < 1.0, "k = {k}: ‖σ‖ = {sup:.4}");
    }
}

#[test]
fn extension_is_injective_on_a_polar_sample() {
    let grid = ComplexGrid::standard();
    let phi = circle_map_from_mu(&smooth_disk_mu(grid)).unwrap();
    let ext = Extender::new(&phi);
    let mut pairs = Vec::new();
    for i in 0..50 {
        for j in 0..50 {
            let z = Complex64::from_polar((i as f64 + 0.5) / 50.0 * 0.98, TAU * j as f64 / 50.0);
            pairs.push((z, ext.extend(z).unwrap()));
        }
    }
    for (a, (za, wa)) in pairs.iter().enumerate() {
        for (zb, wb) in &pairs[a + 1..] {
            if (za - zb).norm() >= 1e-3 {
                assert!((wa - wb).norm() >= 1e-9, "{za} and {zb} collide");
            }
        }
    }
}

#[test]
fn smoothness_probe_along_a_ray() {
    let grid = ComplexGrid::standard();
    let mu0 = smooth_disk_mu(grid);
    let scale = 1.0 / mu0.sup_norm();
    let points = disk_sample(10, 0.8);
    // t·μ0 with ‖μ0‖∞ = 1
    let path = |t: f64| mu0.scaled(c(t * scale, 0.0));
    let at_zero = smoothness_probe(path, 0.0, 0.1, &points).unwrap();
    assert!(at_zero.first_order >= 0.9, "{at_zero:?}");
    let at_four = smoothness_probe(path, 0.4, 0.1, &points).unwrap();
    assert!(at_four.second_differences.iter().all(|d| d.is_finite()));
    assert!((at_four.second_ratio - 1.0).abs() < 0.2, "{at_four:?}");
    let constant = smoothness_probe(|_| Ok(mu0.scaled(c(0.3, 0.0))?), 0.0, 0.1, &points).unwrap();
    assert_eq!(constant.first_differences, [0.0, 0.0]);
    assert_eq!(constant.second_differences, [0.0, 0.0]);
}
