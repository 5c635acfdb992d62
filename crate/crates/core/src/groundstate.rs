//! The ground state `Q` of `-Q + ΔQ + Q^3 = 0` in three dimensions.
//!
//! `Q` is found by shooting on `Q(0)`: the radial ODE
//! `Q'' + (2/r) Q' - Q + Q^3 = 0` is integrated outward with `Q'(0) = 0`, and
//! the initial amplitude is bisected between a trajectory that turns back up
//! (too small) and one that crosses zero (too large). Past the point where
//! the two bracketing trajectories separate, the profile is continued by the
//! linear tail `c e^{-r} / r`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::{Grid, GridKind};

pub const DEFAULT_CERT_TOL: f64 = 1e-6;
pub const DEFAULT_BRACKET: (f64, f64) = (1.0, 10.0);

/// Relative spread between the bracketing trajectories beyond which the
/// shooting solution is no longer trusted.
const MATCH_SPREAD: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct ShootingConfig {
    pub r_max: f64,
    pub n: usize,
    pub tol: f64,
    pub cert_tol: f64,
    pub bracket: (f64, f64),
}

impl Default for ShootingConfig {
    fn default() -> Self {
        Self { r_max: 20.0, n: 8192, tol: 1e-12, cert_tol: DEFAULT_CERT_TOL, bracket: DEFAULT_BRACKET }
    }
}

/// Certified ground-state profile with its norms.
#[derive(Debug, Clone)]
pub struct GroundState {
    r_max: f64,
    tol: f64,
    spacing: f64,
    profile: Vec<f64>,
    derivative: Vec<f64>,
    shoot_value: f64,
    tail_coeff: f64,
    match_radius: f64,
    iterations: usize,
    mass_sq: f64,
    grad_sq: f64,
    l4_4: f64,
    reference: Option<GridReference>,
}

/// Norms of `Q` sampled on a particular grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridReference {
    pub grid: Grid,
    pub mass_sq: f64,
    pub grad_sq: f64,
    pub l4_4: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Outcome {
    /// `Q` went negative at this index.
    Crossed(usize),
    /// `Q'` turned positive while `Q > 0` at this index.
    Turned(usize),
    Survived,
}

struct Trajectory {
    q: Vec<f64>,
    dq: Vec<f64>,
    outcome: Outcome,
}

fn rhs(r: f64, q: f64, p: f64) -> (f64, f64) {
    (p, q - q * q * q - 2.0 * p / r)
}

/// Even series `Q(r) = a + b r^2 + c r^4` about the origin.
fn series_coeffs(a: f64) -> (f64, f64) {
    let b = (a - a * a * a) / 6.0;
    let c = b * (1.0 - 3.0 * a * a) / 20.0;
    (b, c)
}

fn integrate(a: f64, n: usize, h: f64, stop_on_event: bool) -> Trajectory {
    let (b, c) = series_coeffs(a);
    let mut q = Vec::with_capacity(n);
    let mut dq = Vec::with_capacity(n);
    let (mut y, mut p) = (a + b * h * h + c * h.powi(4), 2.0 * b * h + 4.0 * c * h.powi(3));
    q.push(y);
    dq.push(p);
    let mut outcome = Outcome::Survived;
    for i in 1..n {
        let r = i as f64 * h;
        let (k1y, k1p) = rhs(r, y, p);
        let (k2y, k2p) = rhs(r + 0.5 * h, y + 0.5 * h * k1y, p + 0.5 * h * k1p);
        let (k3y, k3p) = rhs(r + 0.5 * h, y + 0.5 * h * k2y, p + 0.5 * h * k2p);
        let (k4y, k4p) = rhs(r + h, y + h * k3y, p + h * k3p);
        y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        q.push(y);
        dq.push(p);
        if outcome == Outcome::Survived {
            if y < 0.0 {
                outcome = Outcome::Crossed(i);
            } else if p > 0.0 {
                outcome = Outcome::Turned(i);
            }
            if stop_on_event && outcome != Outcome::Survived {
                break;
            }
        }
    }
    Trajectory { q, dq, outcome }
}

/// Solves for `Q` with the default certification tolerance.
pub fn solve_ground_state(r_max: f64, n: usize, tol: f64) -> Result<GroundState> {
    ShootingConfig { r_max, n, tol, ..Default::default() }.solve()
}

impl ShootingConfig {
    pub fn solve(&self) -> Result<GroundState> {
        if !(self.r_max >= 15.0) {
            return Err(Error::InvalidConfig(format!("r_max = {} must be at least 15", self.r_max)));
        }
        if !(self.tol > 0.0 && self.tol <= 1e-8) {
            return Err(Error::InvalidConfig(format!("tol = {:e} must lie in (0, 1e-8]", self.tol)));
        }
        if self.n < 64 {
            return Err(Error::InvalidConfig(format!("n = {} is too small", self.n)));
        }
        let h = self.r_max / self.n as f64;
        let n = self.n;
        let (mut lo, mut hi) = self.bracket;
        let lo_out = integrate(lo, n, h, true).outcome;
        let hi_out = integrate(hi, n, h, true).outcome;
        if matches!(lo_out, Outcome::Crossed(_)) || !matches!(hi_out, Outcome::Crossed(_)) {
            return Err(Error::SolverFailure(format!(
                "initial bracket [{lo}, {hi}] does not straddle the ground state \
                 (low end: {lo_out:?}, high end: {hi_out:?})"
            )));
        }

        let mut iterations = 0;
        while hi - lo >= self.tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            match integrate(mid, n, h, true).outcome {
                Outcome::Crossed(_) => hi = mid,
                Outcome::Turned(_) | Outcome::Survived => lo = mid,
            }
            iterations += 1;
        }

        let low = integrate(lo, n, h, false);
        let high = integrate(hi, n, h, false);
        let shoot_value = 0.5 * (lo + hi);
        let mid = integrate(shoot_value, n, h, false);

        let event_index = |o: Outcome| match o {
            Outcome::Crossed(i) | Outcome::Turned(i) => i,
            Outcome::Survived => n,
        };
        let horizon = event_index(low.outcome).min(event_index(high.outcome)).min(event_index(mid.outcome));
        let mut last = 0;
        for i in 0..horizon {
            let scale = mid.q[i].abs();
            if (high.q[i] - low.q[i]).abs() > MATCH_SPREAD * scale || mid.dq[i] >= 0.0 {
                break;
            }
            last = i;
        }
        let match_radius = (last + 1) as f64 * h;
        if match_radius < 5.0 {
            return Err(Error::SolverFailure(format!(
                "shooting trajectory unreliable beyond r = {match_radius:.3}; tighten tol"
            )));
        }

        let tail_coeff = mid.q[last] * match_radius * match_radius.exp();
        let mut profile = mid.q;
        let mut derivative = mid.dq;
        profile.truncate(n);
        derivative.truncate(n);
        for i in (last + 1)..n {
            let r = (i + 1) as f64 * h;
            let t = tail_coeff * (-r).exp() / r;
            profile[i] = t;
            derivative[i] = -t * (1.0 + 1.0 / r);
        }

        let gs = GroundState::assemble(self.r_max, self.tol, profile, derivative, shoot_value, iterations, match_radius)?;
        gs.certify(self.cert_tol)?;
        Ok(gs)
    }
}

fn trapezoid(h: f64, f: impl Iterator<Item = f64>, n: usize) -> f64 {
    // abscissae r_i = (i+1) h; the r = 0 endpoint contributes nothing
    let mut acc = 0.0;
    for (i, v) in f.enumerate() {
        acc += if i + 1 == n { 0.5 * v } else { v };
    }
    acc * h
}

impl GroundState {
    fn assemble(
        r_max: f64,
        tol: f64,
        profile: Vec<f64>,
        derivative: Vec<f64>,
        shoot_value: f64,
        iterations: usize,
        match_radius: f64,
    ) -> Result<Self> {
        let n = profile.len();
        let h = r_max / n as f64;
        let r = |i: usize| (i + 1) as f64 * h;
        let w = |i: usize| 4.0 * PI * r(i) * r(i);
        let mass_sq = trapezoid(h, (0..n).map(|i| w(i) * profile[i] * profile[i]), n);
        let grad_sq = trapezoid(h, (0..n).map(|i| w(i) * derivative[i] * derivative[i]), n);
        let l4_4 = trapezoid(h, (0..n).map(|i| w(i) * profile[i].powi(4)), n);
        let last = n - 1;
        let tail_coeff = profile[last] * r(last) * r(last).exp();
        if !(mass_sq > 0.0 && grad_sq > 0.0) {
            return Err(Error::DegenerateInput("ground-state profile has zero norm".into()));
        }
        Ok(Self {
            r_max,
            tol,
            spacing: h,
            profile,
            derivative,
            shoot_value,
            tail_coeff,
            match_radius,
            iterations,
            mass_sq,
            grad_sq,
            l4_4,
            reference: None,
        })
    }

    /// Rebuilds a ground state from tabulated samples `Q(r_i)` on
    /// `r_i = (i+1) r_max / n`, as stored in an NLSQ file.
    pub fn from_profile(r_max: f64, tol: f64, profile: Vec<f64>) -> Result<Self> {
        let n = profile.len();
        if n < 64 {
            return Err(Error::Malformed(format!("profile has only {n} samples")));
        }
        let h = r_max / n as f64;
        // Q(0) from the even fit a + b r^2 + c r^4 through the first three samples
        let q0 = origin_value(profile[0], profile[1], profile[2]);
        let at = |j: i64| -> f64 {
            if j >= 0 {
                profile[j as usize]
            } else if j == -1 {
                q0
            } else {
                profile[(-j - 2) as usize]
            }
        };
        let mut derivative = vec![0.0; n];
        for i in 0..n {
            let r = (i + 1) as f64 * h;
            derivative[i] = if i + 2 < n {
                let j = i as i64;
                (at(j - 2) - 8.0 * at(j - 1) + 8.0 * at(j + 1) - at(j + 2)) / (12.0 * h)
            } else {
                -profile[i] * (1.0 + 1.0 / r)
            };
        }
        Self::assemble(r_max, tol, profile, derivative, q0, 0, r_max)
    }

    fn certify(&self, cert_tol: f64) -> Result<()> {
        let (g, l, e) = self.pohozhaev_residuals();
        if g.abs() > cert_tol || l.abs() > cert_tol || e.abs() > cert_tol {
            return Err(Error::Certification { grad_residual: g, l4_residual: l, energy_residual: e });
        }
        if self.profile.iter().any(|q| *q <= 0.0) {
            return Err(Error::SolverFailure("profile changes sign (excited state)".into()));
        }
        if self.profile.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::SolverFailure("profile is not strictly decreasing".into()));
        }
        Ok(())
    }

    /// `(grad/mass - 3, l4/mass - 4, E/grad - 1/6)`.
    pub fn pohozhaev_residuals(&self) -> (f64, f64, f64) {
        (
            self.grad_sq / self.mass_sq - 3.0,
            self.l4_4 / self.mass_sq - 4.0,
            (0.5 * self.grad_sq - 0.25 * self.l4_4) / self.grad_sq - 1.0 / 6.0,
        )
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn n(&self) -> usize {
        self.profile.len()
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn radii(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.profile.len()).map(move |i| (i + 1) as f64 * self.spacing)
    }

    pub fn profile(&self) -> &[f64] {
        &self.profile
    }

    pub fn shoot_value(&self) -> f64 {
        self.shoot_value
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn match_radius(&self) -> f64 {
        self.match_radius
    }

    /// `||Q||_2^2`, also `M[Q]`.
    pub fn mass_sq(&self) -> f64 {
        self.reference.map_or(self.mass_sq, |r| r.mass_sq)
    }

    /// `||grad Q||_2^2`.
    pub fn grad_sq(&self) -> f64 {
        self.reference.map_or(self.grad_sq, |r| r.grad_sq)
    }

    /// `||Q||_4^4`.
    pub fn l4_4(&self) -> f64 {
        self.reference.map_or(self.l4_4, |r| r.l4_4)
    }

    /// Norms of the profile itself, ignoring any grid reference.
    pub fn profile_norms(&self) -> (f64, f64, f64) {
        (self.mass_sq, self.grad_sq, self.l4_4)
    }

    pub(crate) fn with_profile_norms(self, mass_sq: f64, grad_sq: f64, l4_4: f64) -> Self {
        Self { mass_sq, grad_sq, l4_4, ..self }
    }

    pub fn reference(&self) -> Option<&GridReference> {
        self.reference.as_ref()
    }

    /// Copy of `Q` whose norms are those of `Q` sampled on `grid`, so that
    /// ratios against `Q` carry the same quadrature error as the data. On
    /// such a copy sampled `a Q` has `eta = a^2` and
    /// `me_ratio = 3 a^4 - 2 a^6` to rounding.
    pub fn on_grid(&self, grid: &Grid) -> Result<Self> {
        let sampled = sample_soliton(self, grid, SolitonParams::default())?;
        let n = crate::invariants::norms(&sampled)?;
        let mut out = self.clone();
        out.reference = Some(GridReference { grid: *grid, mass_sq: n.mass, grad_sq: n.grad_sq, l4_4: n.l4_4 });
        Ok(out)
    }

    /// Drops any grid reference.
    pub fn continuum(&self) -> Self {
        Self { reference: None, ..self.clone() }
    }

    pub fn energy(&self) -> f64 {
        0.5 * self.grad_sq() - 0.25 * self.l4_4()
    }

    /// Sharp Gagliardo-Nirenberg constant `4 / (3 ||Q||_2 ||grad Q||_2)`.
    pub fn c_gn(&self) -> f64 {
        4.0 / (3.0 * self.mass_sq().sqrt() * self.grad_sq().sqrt())
    }

    /// `||Q||_2 ||grad Q||_2`, the normalization of `eta`.
    pub fn eta_scale(&self) -> f64 {
        (self.mass_sq() * self.grad_sq()).sqrt()
    }

    /// `Q(r)` by cubic Hermite interpolation of the tabulated profile.
    pub fn value(&self, r: f64) -> f64 {
        self.eval(r).0
    }

    /// `Q'(r)`.
    pub fn slope(&self, r: f64) -> f64 {
        self.eval(r).1
    }

    fn eval(&self, r: f64) -> (f64, f64) {
        let r = r.abs();
        let h = self.spacing;
        let n = self.profile.len();
        if r <= h {
            // blend the origin series into the first sample
            let a = self.shoot_value;
            let (b, c) = series_coeffs(a);
            if r == h {
                return (self.profile[0], self.derivative[0]);
            }
            let q = a + b * r * r + c * r.powi(4);
            let dq = 2.0 * b * r + 4.0 * c * r.powi(3);
            // correct the series by the mismatch at r = h, scaled by (r/h)^2
            let q_h = a + b * h * h + c * h.powi(4);
            let s = (r / h).powi(2);
            return (q + s * (self.profile[0] - q_h), dq + 2.0 * r / (h * h) * (self.profile[0] - q_h));
        }
        if r >= self.r_max {
            let t = self.tail_coeff * (-r).exp() / r;
            return (t, -t * (1.0 + 1.0 / r));
        }
        let x = r / h - 1.0;
        let i = (x.floor() as usize).min(n - 2);
        let s = x - i as f64;
        let (y0, y1) = (self.profile[i], self.profile[i + 1]);
        let (m0, m1) = (self.derivative[i] * h, self.derivative[i + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        let q = (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * m0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * m1;
        let dq = ((6.0 * s2 - 6.0 * s) * y0
            + (3.0 * s2 - 4.0 * s + 1.0) * m0
            + (-6.0 * s2 + 6.0 * s) * y1
            + (3.0 * s2 - 2.0 * s) * m1)
            / h;
        (q, dq)
    }
}

fn origin_value(q1: f64, q2: f64, q3: f64) -> f64 {
    // samples at h, 2h, 3h of a + b r^2 + c r^4:
    // q1 = a + b + c, q2 = a + 4b + 16c, q3 = a + 9b + 81c  (units of h)
    // eliminating b, c gives a = (15 q1 - 6 q2 + q3) / 10
    (15.0 * q1 - 6.0 * q2 + q3) / 10.0
}

/// Parameters of the rescaled soliton family
/// `x -> e^{i theta} lambda^{3/2} beta^{-1} Q(lambda (x / beta - x0))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolitonParams {
    pub lambda: f64,
    pub x0: [f64; 3],
    pub theta: f64,
    pub beta: f64,
}

impl Default for SolitonParams {
    fn default() -> Self {
        Self { lambda: 1.0, x0: [0.0; 3], theta: 0.0, beta: 1.0 }
    }
}

/// Samples the rescaled soliton on `grid`.
pub fn sample_soliton(q: &GroundState, grid: &Grid, p: SolitonParams) -> Result<Field> {
    if !(p.lambda > 0.0 && p.beta > 0.0) {
        return Err(Error::InvalidConfig(format!("lambda = {} and beta = {} must be positive", p.lambda, p.beta)));
    }
    // the tail is measured one half-width away from the soliton center
    let center = [p.beta * p.x0[0], p.beta * p.x0[1], p.beta * p.x0[2]];
    let l = grid.half_width();
    match grid.kind() {
        GridKind::Periodic3d => {
            if center.iter().any(|c| c.abs() >= l) {
                return Err(Error::DomainTooSmall(format!("soliton center {center:?} lies outside the box")));
            }
        }
        GridKind::Radial1d => {
            if center.iter().any(|c| *c != 0.0) {
                return Err(Error::WrongMode { expected: "periodic3d (off-center soliton)" });
            }
        }
    }
    let peak = q.value(0.0);
    let tail = q.value(p.lambda * l / p.beta);
    if tail > 1e-8 * peak {
        return Err(Error::DomainTooSmall(format!(
            "soliton tail at the domain edge is {:.2e} of its peak",
            tail / peak
        )));
    }
    let amp = p.lambda.powf(1.5) / p.beta;
    let phase = Complex64::from_polar(amp, p.theta);
    let f = Field::from_fn(*grid, |x| {
        let d = [x[0] / p.beta - p.x0[0], x[1] / p.beta - p.x0[1], x[2] / p.beta - p.x0[2]];
        let r = p.lambda * (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        phase * q.value(r)
    });
    Ok(f)
}

/// `a Q` sampled on `grid`.
pub fn sample_scaled_ground_state(q: &GroundState, grid: &Grid, a: f64) -> Result<Field> {
    let base = sample_soliton(q, grid, SolitonParams::default())?;
    Ok(base.scaled(Complex64::new(a, 0.0)))
}
