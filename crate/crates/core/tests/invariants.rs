mod common;

use common::{lumps_field, q, random_lumps, rel};
use nlslab::{compute_invariants, gn_functional, sample_soliton, Field, Grid, SolitonParams};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn lumps_case(seed: u64, kicked: bool) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lumps = random_lumps(&mut rng, kicked);
    lumps_field(Grid::periodic(32, 8.0).unwrap(), &lumps)
}

/// `Q` plus a small radial bump, on the default radial grid.
fn near_q_case(seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = Grid::radial(8192, 20.0).unwrap();
    let base = sample_soliton(q(), &grid, SolitonParams::default()).unwrap();
    let (eps, c, w) = (rng.gen_range(-0.2..0.2), rng.gen_range(0.0..3.0), rng.gen_range(0.5..2.0));
    let lambda = rng.gen_range(0.7..1.4);
    let bumped = Field::from_fn(grid, |x| Complex64::new(eps * (-(x[0] - c).powi(2) / (2.0 * w * w)).exp(), 0.0));
    let v: Vec<Complex64> = base.values().iter().zip(bumped.values()).map(|(a, b)| a * lambda + b).collect();
    Field::new(grid, v, 0.0).unwrap()
}

fn check_energy_sandwich(f: &Field) {
    let r = compute_invariants(f, q()).unwrap();
    let me = r.me_ratio(q());
    let eta = r.eta;
    let slack = 1e-10 + 1e-4 * (3.0 * eta * eta).max(1.0);
    assert!(me <= 3.0 * eta * eta + slack, "me={me} eta={eta}");
    assert!(me >= 3.0 * eta * eta - 2.0 * eta.powi(3) - slack, "me={me} eta={eta}");
    assert!(rel(eta * eta * q().mass_sq() * q().grad_sq(), r.mass * r.grad_norm_sq) < 1e-12);
    assert_eq!(r.energy, r.grad_norm_sq / 2.0 - r.l4_norm_4 / 4.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gn_quotient_never_exceeds_the_sharp_constant(seed in any::<u64>()) {
        let f = lumps_case(seed, true);
        prop_assert!(gn_functional(&f, q()).unwrap() <= q().c_gn());
    }

    #[test]
    fn energy_is_sandwiched_by_eta(seed in any::<u64>()) {
        check_energy_sandwich(&lumps_case(seed, true));
    }

    #[test]
    fn phase_leaves_the_report_unchanged(seed in any::<u64>(), theta in 0.0..std::f64::consts::TAU) {
        let f = lumps_case(seed, true);
        let a = compute_invariants(&f, q()).unwrap();
        let b = compute_invariants(&f.with_phase(theta), q()).unwrap();
        for (x, y) in [(a.mass, b.mass), (a.energy, b.energy), (a.grad_norm_sq, b.grad_norm_sq), (a.l4_norm_4, b.l4_norm_4), (a.eta, b.eta)] {
            prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
        }
        for j in 0..3 {
            prop_assert!((a.momentum[j] - b.momentum[j]).abs() <= 1e-12 * a.mass);
        }
    }

    #[test]
    fn periodic_shift_leaves_the_report_unchanged(seed in any::<u64>(), s in prop::array::uniform3(-5i64..5)) {
        let f = lumps_case(seed, true);
        let a = compute_invariants(&f, q()).unwrap();
        let b = compute_invariants(&f.rolled(s).unwrap(), q()).unwrap();
        for (x, y) in [(a.mass, b.mass), (a.energy, b.energy), (a.grad_norm_sq, b.grad_norm_sq), (a.l4_norm_4, b.l4_norm_4)] {
            prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
        }
        for j in 0..3 {
            prop_assert!((a.momentum[j] - b.momentum[j]).abs() <= 1e-12 * a.mass.max(1.0));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gn_bound_holds_near_the_ground_state(seed in any::<u64>()) {
        let f = near_q_case(seed);
        let ratio = gn_functional(&f, q()).unwrap();
        prop_assert!(ratio <= q().c_gn() * (1.0 + 1e-4), "{} vs {}", ratio, q().c_gn());
        check_energy_sandwich(&f);
    }
}
