mod common;

use common::{gaussian, q, rel};
use nlslab::evolution::{conservation_audit, fit_blowup_rate, step_with, Stepper};
use nlslab::{evolve, sample_soliton, EvolveConfig, Field, Grid, Outcome, SolitonParams};
use num_complex::Complex64;

fn fixed(dt: f64, t_end: f64) -> EvolveConfig {
    EvolveConfig { dt0: dt, t_end, cfl_alpha: 1.0, ..Default::default() }
}

fn max_diff(a: &Field, b: &Field) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn l2_diff(a: &Field, b: &Field) -> f64 {
    let w = a.grid().weight(0);
    (a.values().iter().zip(b.values()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>() * w).sqrt()
}

fn run_steps(f: &Field, dt: f64, n: usize) -> Field {
    let stepper = Stepper::new(*f.grid(), false);
    let mut u = f.clone();
    for _ in 0..n {
        u = step_with(&stepper, &u, dt).unwrap();
    }
    u
}

#[test]
fn plane_wave_is_reproduced() {
    // box [-pi, pi)^3, so integer wave vectors are periodic
    let grid = Grid::periodic(16, std::f64::consts::PI).unwrap();
    let (c, k) = (0.7, [1.0, -2.0, 3.0]);
    let wave = |x: [f64; 3], t: f64| {
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        Complex64::from_polar(c, k[0] * x[0] + k[1] * x[1] + k[2] * x[2] - k2 * t + c * c * t)
    };
    let f0 = Field::from_fn(grid, |x| wave(x, 0.0));
    let run = evolve(&f0, &fixed(0.01, 1.0), q()).unwrap();
    assert_eq!(run.outcome, Outcome::ReachedTEnd);
    assert!(run.t_blowup_observed.is_none());
    let exact = Field::from_fn(grid, |x| wave(x, 1.0));
    assert!(max_diff(&run.final_field, &exact) < 1e-11, "{}", max_diff(&run.final_field, &exact));
    let audit = conservation_audit(&run.diagnostics, run.outcome).unwrap();
    assert!(audit.mass_rel_drift < 1e-10);
    assert!(audit.energy_rel_drift < 1e-10);
}

#[test]
fn time_reversal_returns_the_datum() {
    let grid = Grid::periodic(32, 8.0).unwrap();
    let f0 = Field::from_fn(grid, |x| {
        let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        Complex64::from_polar(1.5 * (-0.5 * r2).exp(), 0.3 * x[0])
    });
    let forward = run_steps(&f0, 0.01, 30);
    let back = run_steps(&forward.conj(), 0.01, 30).conj();
    assert!(max_diff(&back, &f0) < 1e-10, "{}", max_diff(&back, &f0));

    let rgrid = Grid::radial(2048, 20.0).unwrap();
    let r0 = gaussian(rgrid, 1.5, 1.0);
    let back = run_steps(&run_steps(&r0, 0.01, 30).conj(), 0.01, 30).conj();
    assert!(max_diff(&back, &r0) < 1e-10, "{}", max_diff(&back, &r0));
}

#[test]
fn strang_splitting_is_second_order() {
    let grid = Grid::periodic(32, 8.0).unwrap();
    let f0 = gaussian(grid, 1.2, 1.0);
    let t = 0.4;
    let reference = run_steps(&f0, t / 3200.0, 3200);
    let errs: Vec<f64> = [20, 40, 80].iter().map(|&n| l2_diff(&run_steps(&f0, t / n as f64, n), &reference)).collect();
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.6..4.4).contains(&ratio), "{errs:?}");
    }
}

#[test]
fn short_soliton_run_keeps_its_modulus() {
    let grid = Grid::periodic(128, 16.0).unwrap();
    let f0 = sample_soliton(q(), &grid, SolitonParams::default()).unwrap();
    let run = evolve(&f0, &fixed(1e-3, 0.1), q()).unwrap();
    let modulus = Field::new(grid, run.final_field.values().iter().map(|v| Complex64::new(v.norm(), 0.0)).collect(), 0.1)
        .unwrap();
    let err = l2_diff(&modulus, &f0) / f0.mass().sqrt();
    assert!(err < 1e-3, "{err}");
    // the phase advances as e^{it}
    let centre = grid.len() / 2 + grid.n() / 2 + grid.n() * grid.n() / 2;
    let phase = (run.final_field.values()[centre] / f0.values()[centre]).arg();
    assert!((phase - 0.1).abs() < 1e-3, "{phase}");
    let audit = conservation_audit(&run.diagnostics, run.outcome).unwrap();
    assert!(audit.mass_rel_drift < 1e-10, "{audit:?}");
    assert!(audit.energy_rel_drift < 1e-6, "{audit:?}");
    assert!(audit.momentum_abs_drift < 1e-10, "{audit:?}");
}

#[test]
fn radial_subthreshold_soliton_stays_in_its_band() {
    let grid = Grid::radial(8192, 20.0).unwrap();
    let qg = q().on_grid(&grid).unwrap();
    let f0 = sample_soliton(q(), &grid, SolitonParams::default()).unwrap().scaled(Complex64::new(0.9, 0.0));
    let cfg = EvolveConfig { dt0: 1e-3, t_end: 5.0, diag_every: 50, ..Default::default() };
    let run = evolve(&f0, &cfg, &qg).unwrap();
    assert_eq!(run.outcome, Outcome::ReachedTEnd);
    assert!((run.t_final - 5.0).abs() < 1e-12);
    let cap = 0.81 * (1.0 + 1e-3);
    for row in &run.diagnostics.rows {
        assert!(row.eta <= cap, "t={} eta={}", row.t, row.eta);
    }
    let audit = conservation_audit(&run.diagnostics, run.outcome).unwrap();
    assert!(audit.mass_rel_drift < 1e-6, "{audit:?}");
    assert!(audit.energy_rel_drift < 1e-3, "{audit:?}");
}

#[test]
fn radial_superthreshold_soliton_blows_up() {
    let grid = Grid::radial(8192, 20.0).unwrap();
    let qg = q().on_grid(&grid).unwrap();
    let f0 = sample_soliton(q(), &grid, SolitonParams::default()).unwrap().scaled(Complex64::new(1.2, 0.0));
    let cfg = EvolveConfig { dt0: 1e-3, t_end: 5.0, diag_every: 5, blowup_factor: 20.0, ..Default::default() };
    let run = evolve(&f0, &cfg, &qg).unwrap();
    assert_eq!(run.outcome, Outcome::BlowupDetected);
    let t_obs = run.t_blowup_observed.unwrap();
    assert_eq!(t_obs, run.t_final);
    assert!(run.max_grad >= 20.0 * f0_grad(&run));
    let floor = 1.44 * (1.0 - 1e-3);
    for row in &run.diagnostics.rows {
        assert!(row.eta >= floor, "t={} eta={}", row.t, row.eta);
    }
    let fit = fit_blowup_rate(&run.grad_history).unwrap();
    assert!(fit.exponent >= 0.25 - 0.1, "{fit:?}");
    assert!(fit.t_star >= t_obs);
    let audit = conservation_audit(&run.diagnostics, run.outcome).unwrap();
    assert_eq!(audit.rows_used, run.diagnostics.len() - 1);
}

fn f0_grad(run: &nlslab::RunResult) -> f64 {
    run.grad_history[0].1
}

#[test]
fn adaptive_step_follows_the_gradient() {
    let grid = Grid::periodic(32, 8.0).unwrap();
    let f0 = gaussian(grid, 1.0, 1.0);
    let cfg = EvolveConfig { dt0: 1e-2, t_end: 0.1, ..Default::default() };
    let run = evolve(&f0, &cfg, q()).unwrap();
    // cfl_alpha = 0.5 at the initial gradient halves the step
    assert_eq!(run.steps, 20);
    let snaps = EvolveConfig { snapshot_every: 5, ..cfg };
    let run = evolve(&f0, &snaps, q()).unwrap();
    assert_eq!(run.snapshots.len(), 5);
    assert_eq!(run.snapshots[0].time(), 0.0);
    assert!(run.snapshots.windows(2).all(|w| w[1].time() > w[0].time()));
}
