use num_complex::Complex64;
use qclab::beltrami::{restrict_glue, BeltramiField, Disk, SetModel};
use qclab::circle::CircleHomeo;
use qclab::fields::{Bump, FieldSpec};
use qclab::lieb::*;
use qclab::moebius::MoebiusTransform;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn negation() -> MoebiusTransform {
    MoebiusTransform::affine(c(-1.0, 0.0), c(0.0, 0.0)).unwrap()
}

fn doubling() -> MoebiusTransform {
    MoebiusTransform::affine(c(2.0, 0.0), c(0.0, 0.0)).unwrap()
}

#[test]
fn basepoint_projects_to_identity_traces() {
    let set = two_disk_set();
    let t = project_tilde(&BeltramiField::zero(scenario_grid()), &set).unwrap();
    for phi in t.components() {
        assert!(phi.sup_angular_distance(&CircleHomeo::identity(phi.len())).unwrap() < 1e-12);
    }
    assert!(t.mu_on_set().is_zero());
    let s = de_section(&t).unwrap().sup_norm();
    assert!(s < 1e-10, "‖s(t)‖ = {s:.3e}");
    assert!(lieb_equal(&t, &t, 1e-12).unwrap());
}

#[test]
fn coefficient_on_e_only_leaves_traces_fixed() {
    let set = two_disk_set();
    let grid = scenario_grid();
    let mu = FieldSpec::Bumps { bumps: vec![Bump { center: c(0.5, 1.0), radius: 1.5, amplitude: c(0.3, 0.2) }] }
        .build(grid)
        .unwrap();
    let t = project_tilde(&mu, &set).unwrap();
    for phi in t.components() {
        assert!(phi.sup_angular_distance(&CircleHomeo::identity(phi.len())).unwrap() < 1e-12);
    }
    assert_eq!(t.mu_on_set().values(), mu.values());
    let base = project_tilde(&BeltramiField::zero(grid), &set).unwrap();
    assert!(!lieb_equal(&t, &base, 1e-2).unwrap());
}

#[test]
fn projections_on_different_sets_are_not_comparable() {
    let grid = scenario_grid();
    let other = SetModel::disk_complement(vec![Disk::new(c(-4.0, 0.0), 1.0)]).unwrap();
    let a = project_tilde(&BeltramiField::zero(grid), &two_disk_set()).unwrap();
    let b = project_tilde(&BeltramiField::zero(grid), &other).unwrap();
    assert!(lieb_equal(&a, &b, 1.0).is_err());
    let finite = SetModel::finite_points(vec![
        qclab::sphere::SpherePoint::new(0.0, 0.0),
        qclab::sphere::SpherePoint::new(1.0, 0.0),
        qclab::sphere::SpherePoint::Infinity,
    ])
    .unwrap();
    assert!(project_tilde(&BeltramiField::zero(grid), &finite).is_err());
}

#[test]
fn section_is_a_right_inverse_and_prop_1_proxy() {
    let set = two_disk_set();
    let grid = scenario_grid();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..3 {
        let mu = scenario_field(&mut rng, grid, &set, 0.4, &[]).unwrap();
        let t = project_tilde(&mu, &set).unwrap();
        let s = de_section(&t).unwrap();
        assert!(s.sup_norm() < 1.0);
        // s(t) agrees with μ on E and is σ-corrected on the disks
        assert_eq!(restrict_glue(&mu, &set, &s).unwrap().values(), s.values());
        let back = project_tilde(&s, &set).unwrap();
        let d = lieb_distance(&back, &t).unwrap();
        assert!(d.max() < 5e-3, "section round trip {d:?}");

        // perturbing the E coordinate by 1e-2 is detected
        let bump = Bump { center: c(0.0, 2.0), radius: 1.0, amplitude: c(0.02, 0.0) };
        let extra = FieldSpec::Bumps { bumps: vec![bump] }.build(grid).unwrap();
        let moved: Vec<Complex64> = mu.values().iter().zip(extra.values()).map(|(a, b)| a + b).collect();
        let moved = BeltramiField::new(qclab::grid::GridField::new(grid, moved).unwrap(), grid.support_radius()).unwrap();
        assert!(!lieb_equal(&project_tilde(&moved, &set).unwrap(), &t, 5e-3).unwrap());
    }
}

#[test]
fn section_norm_grows_with_the_distance_bound() {
    let set = two_disk_set();
    let grid = scenario_grid();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let direction = scenario_field(&mut rng, grid, &set, 0.5, &[]).unwrap();
    let mut last = (0.0, 0.0);
    for k in [0.1, 0.3, 0.5, 0.7] {
        let mu = direction.scaled(c(k / 0.5, 0.0)).unwrap();
        let s = de_section(&project_tilde(&mu, &set).unwrap()).unwrap();
        let (norm, d) = (s.sup_norm(), teich_distance_bound(&mu));
        assert!(norm < 1.0);
        assert!(norm > last.0 && d > last.1, "k = {k}: ‖s‖ = {norm:.4}, d ≤ {d:.4}");
        last = (norm, d);
    }
}

#[test]
fn identity_action_returns_mu() {
    let set = two_disk_set();
    let grid = scenario_grid();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mu = scenario_field(&mut rng, grid, &set, 0.3, &[]).unwrap();
    let action = f_g_action(&mu, &MoebiusTransform::identity(), &set).unwrap();
    assert_eq!(action.set, set);
    assert_eq!(action.alpha, vec![0, 1]);
    let err = action.nu.distance(&mu).unwrap();
    assert!(err < 5e-3, "ν - μ = {err:.3e}");
}

#[test]
fn doubling_scales_the_disks() {
    let action = f_g_action(&BeltramiField::zero(scenario_grid()), &doubling(), &two_disk_set()).unwrap();
    assert!(action.set.find_disk(c(8.0, 0.0), 2.0, 1e-12).is_some());
    assert!(action.set.find_disk(c(-8.0, 0.0), 2.0, 1e-12).is_some());
    assert!(action.nu.sup_norm() < 1e-10);
}

#[test]
fn theorem_a_for_negation_and_doubling() {
    let set = two_disk_set();
    let grid = scenario_grid();
    for g in [negation(), doubling()] {
        let zero = theorem_a_residual(&BeltramiField::zero(grid), &g, &set, 1e-10).unwrap();
        assert!(zero.pass, "{zero:?}");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..2 {
        let mu = scenario_field(&mut rng, grid, &set, 0.3, &[]).unwrap();
        let neg = theorem_a_residual(&mu, &negation(), &set, 5e-3).unwrap();
        assert_eq!(neg.alpha, vec![1, 0]);
        assert!(neg.pass, "{neg:?}");
        let dbl = theorem_a_residual(&mu, &doubling(), &set, 5e-3).unwrap();
        assert!(dbl.pass, "{dbl:?}");
    }
}

#[test]
fn invariance_under_negation() {
    let set = two_disk_set();
    let grid = scenario_grid();
    let group = [MoebiusTransform::identity(), negation()];
    let zero = g_invariance_check(&BeltramiField::zero(grid), &group, &set, 5e-3).unwrap();
    assert!(zero.mu_invariant && zero.teich_fixed && zero.section_invariant);

    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let sym = scenario_field(&mut rng, grid, &set, 0.3, &[negation()]).unwrap();
    let r = g_invariance_check(&sym, &group, &set, 5e-3).unwrap();
    assert!(r.mu_invariant && r.teich_fixed && r.section_invariant, "{r:?}");

    let skew = scenario_field(&mut rng, grid, &set, 0.3, &[]).unwrap();
    let r = g_invariance_check(&skew, &group, &set, 5e-3).unwrap();
    assert!(r.mu_residual > 1e-2 && r.section_residual > 1e-2, "{r:?}");
    assert!(!r.mu_invariant && !r.section_invariant);

    assert!(g_invariance_check(&sym, &[doubling()], &set, 5e-3).is_err());
}
