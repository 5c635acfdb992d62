mod common;

use std::f64::consts::PI;

use common::{gaussian, q, rel};
use nlslab::groundstate::{ShootingConfig, DEFAULT_BRACKET};
use nlslab::{compute_invariants, gn_functional, sample_soliton, solve_ground_state, Error, Grid, SolitonParams};
use num_complex::Complex64;

#[test]
fn pohozhaev_identities_hold() {
    let q = q();
    assert!(rel(q.grad_sq() / q.mass_sq(), 3.0) < 1e-6);
    assert!(rel(q.l4_4() / q.mass_sq(), 4.0) < 1e-6);
    assert!(rel(q.energy() / q.grad_sq(), 1.0 / 6.0) < 1e-6);
    assert_eq!(q.c_gn(), 4.0 / (3.0 * q.mass_sq().sqrt() * q.grad_sq().sqrt()));
}

#[test]
fn profile_is_positive_and_decreasing() {
    let p = q().profile();
    assert!(p.iter().all(|v| *v > 0.0));
    assert!(p.windows(2).all(|w| w[1] < w[0]));
    // exponential tail
    let (r1, r2) = (10.0, 12.0);
    let decay = (q().value(r1) * r1 / (q().value(r2) * r2)).ln() / (r2 - r1);
    assert!((decay - 1.0).abs() < 1e-3, "{decay}");
}

#[test]
fn self_convergence_under_refinement() {
    let coarse = q();
    let fine = solve_ground_state(20.0, 32768, 1e-12).unwrap();
    assert!(rel(coarse.mass_sq(), fine.mass_sq()) < 1e-8);
    // reference from a tighter shoot on the doubled grid
    let reference = solve_ground_state(20.0, 32768, 1e-14).unwrap();
    assert!((coarse.shoot_value() - reference.shoot_value()).abs() < 1e-9);
    assert!(rel(coarse.mass_sq(), reference.mass_sq()) < 1e-8);
    // fourth-order integration: the mass error drops by about 16 on halving h
    let quarter = solve_ground_state(20.0, 4096, 1e-12).unwrap();
    let half = solve_ground_state(20.0, 8192, 1e-12).unwrap();
    let e1 = (quarter.shoot_value() - reference.shoot_value()).abs();
    let e2 = (half.shoot_value() - reference.shoot_value()).abs();
    assert!(e2 < e1, "{e1} {e2}");
}

#[test]
fn bisection_iterations_are_bounded() {
    let q = q();
    let width = DEFAULT_BRACKET.1 - DEFAULT_BRACKET.0;
    assert!(q.iterations() as f64 <= (width / q.tol()).log2().ceil() + 1.0);
}

#[test]
fn rejects_bad_inputs() {
    assert!(matches!(solve_ground_state(10.0, 8192, 1e-12), Err(Error::InvalidConfig(_))));
    assert!(matches!(solve_ground_state(20.0, 8192, 1e-6), Err(Error::InvalidConfig(_))));
    let no_bracket = ShootingConfig { bracket: (5.0, 10.0), ..Default::default() };
    assert!(matches!(no_bracket.solve(), Err(Error::SolverFailure(_))));
    let strict = ShootingConfig { n: 256, cert_tol: 1e-14, ..Default::default() };
    assert!(matches!(strict.solve(), Err(Error::Certification { .. })));
}

#[test]
fn sampling_identity_scaling_and_symmetry() {
    let q = q();
    let grid = Grid::periodic(128, 16.0).unwrap();
    let plain = sample_soliton(q, &grid, SolitonParams::default()).unwrap();
    let base = compute_invariants(&plain, q).unwrap();
    assert!(rel(base.mass, q.mass_sq()) < 1e-5);

    // the narrow copy is resolved on the radial grid
    let fine = Grid::radial(8192, 20.0).unwrap();
    let wide = compute_invariants(&sample_soliton(q, &fine, SolitonParams::default()).unwrap(), q).unwrap();
    let narrow = sample_soliton(q, &fine, SolitonParams { lambda: 2.0, ..Default::default() }).unwrap();
    let r = compute_invariants(&narrow, q).unwrap();
    assert!(rel(r.mass, wide.mass) < 1e-5, "{} {}", r.mass, wide.mass);
    assert!(rel(r.grad_norm_sq, 4.0 * wide.grad_norm_sq) < 1e-4);

    // a shift by a whole number of cells
    let moved = SolitonParams { x0: [1.0, 0.0, 0.0], theta: PI / 4.0, ..Default::default() };
    let r = compute_invariants(&sample_soliton(q, &grid, moved).unwrap(), q).unwrap();
    for (a, b) in [(r.mass, base.mass), (r.energy, base.energy), (r.grad_norm_sq, base.grad_norm_sq), (r.eta, base.eta)] {
        assert!(rel(a, b) < 1e-12, "{a} {b}");
    }
    assert!(r.momentum.iter().all(|p| p.abs() < 1e-12));
}

#[test]
fn sampling_into_a_small_box_fails() {
    let grid = Grid::periodic(32, 4.0).unwrap();
    assert!(matches!(sample_soliton(q(), &grid, SolitonParams::default()), Err(Error::DomainTooSmall(_))));
}

#[test]
fn ground_state_attains_the_gn_constant() {
    let q = q();
    for grid in [Grid::periodic(128, 16.0).unwrap(), Grid::radial(8192, 20.0).unwrap()] {
        let f = sample_soliton(q, &grid, SolitonParams::default()).unwrap();
        let ratio = gn_functional(&f, q).unwrap();
        assert!(rel(ratio, q.c_gn()) < 1e-4, "{ratio} vs {}", q.c_gn());
        for a in [0.3, 1.7] {
            let g = gn_functional(&f.scaled(Complex64::new(a, 0.0)), q).unwrap();
            assert!(rel(g, ratio) < 1e-10, "{a}: {g} vs {ratio}");
        }
    }
    let g = gaussian(Grid::periodic(64, 8.0).unwrap(), 1.0, 1.0);
    assert!(gn_functional(&g, q).unwrap() < q.c_gn());
}
