//! Variance-type functionals, the localized virial identity and the
//! blow-up-time bounds built on them.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{Field, Gradient};
use crate::grid::GridKind;
use crate::groundstate::GroundState;
use crate::invariants::{compute_invariants, exterior_norms_with, norms_with, ExteriorNorms, InvariantReport};
use crate::spectral::Fft3;
use crate::thresholds::{solve_lambda, ETA_TOL};

pub const GAMMA0_DEFAULT: f64 = 0.125;
pub const C_R_DEFAULT: f64 = 4.0;
pub const C2_DEFAULT: f64 = 10.0;

/// Relative mass mismatch tolerated by the unit-mass hypothesis.
pub const MASS_TOL: f64 = 1e-6;

/// Largest outer-shell mass fraction for which the periodic variance is trusted.
pub const SHELL_TOL: f64 = 1e-6;

/// Transition polynomial on `1 <= s <= 2`, coefficients of `t^j` with `t = s - 1`.
/// Matches `s^2` to fourth order at `s = 1` and zero to fourth order at
/// `s = 2`, so `phi` is C^4 and its bi-Laplacian is continuous.
const TRANSITION: [f64; 10] = [1.0, 2.0, 1.0, 0.0, 0.0, -301.0, 973.0, -1226.0, 705.0, -155.0];

/// Value and first four derivatives of the radial profile `phi(s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialJet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub d4: f64,
}

pub fn cutoff_profile(s: f64) -> RadialJet {
    if s <= 1.0 {
        return RadialJet { value: s * s, d1: 2.0 * s, d2: 2.0, d3: 0.0, d4: 0.0 };
    }
    if s >= 2.0 {
        return RadialJet { value: 0.0, d1: 0.0, d2: 0.0, d3: 0.0, d4: 0.0 };
    }
    transition_jet(s - 1.0)
}

/// The transition polynomial and its derivatives at `t = s - 1`, valid on the
/// closed interval `0 <= t <= 1`.
fn transition_jet(t: f64) -> RadialJet {
    let mut d = [0.0; 5];
    // Horner on the value and, by the product rule, on each derivative
    for c in TRANSITION.iter().rev() {
        for k in (1..5).rev() {
            d[k] = d[k] * t + k as f64 * d[k - 1];
        }
        d[0] = d[0] * t + c;
    }
    RadialJet { value: d[0], d1: d[1], d2: d[2], d3: d[3], d4: d[4] }
}

/// `max(sup |Laplacian phi - 6|, sup |bi-Laplacian phi|)` over `s >= 1`, the
/// constant in the remainder estimate.
pub fn remainder_constant() -> f64 {
    static C: OnceLock<f64> = OnceLock::new();
    *C.get_or_init(|| {
        let mut c: f64 = 0.0;
        let samples = 200_000;
        for i in 0..=samples {
            let t = i as f64 / samples as f64;
            let s = 1.0 + t;
            let j = transition_jet(t);
            let lap = j.d2 + 2.0 * j.d1 / s;
            let bilap = j.d4 + 4.0 * j.d3 / s;
            c = c.max((lap - 6.0).abs()).max(bilap.abs());
        }
        c
    })
}

/// The localizing weight `R^2 phi(x / R)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cutoff {
    radius: f64,
}

impl Cutoff {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidConfig(format!("cutoff radius must be positive, got {radius}")));
        }
        Ok(Self { radius })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// `phi(y)`.
    pub fn phi(y: [f64; 3]) -> f64 {
        cutoff_profile(norm(y)).value
    }

    /// `grad phi(y)`.
    pub fn gradient(y: [f64; 3]) -> [f64; 3] {
        let s = norm(y);
        if s <= 1.0 {
            return y.map(|c| 2.0 * c);
        }
        let d1 = cutoff_profile(s).d1;
        y.map(|c| d1 * c / s)
    }

    /// Hessian `phi'' yy^T + (phi'/s)(I - yy^T)` with `y` normalized.
    pub fn hessian(y: [f64; 3]) -> [[f64; 3]; 3] {
        let s = norm(y);
        let j = cutoff_profile(s);
        let mut h = [[0.0; 3]; 3];
        if s <= 1.0 {
            for (i, row) in h.iter_mut().enumerate() {
                row[i] = 2.0;
            }
            return h;
        }
        let tangential = j.d1 / s;
        for a in 0..3 {
            for b in 0..3 {
                let yy = y[a] * y[b] / (s * s);
                h[a][b] = j.d2 * yy + tangential * (if a == b { 1.0 } else { 0.0 } - yy);
            }
        }
        h
    }

    pub fn laplacian(y: [f64; 3]) -> f64 {
        let s = norm(y);
        if s <= 1.0 {
            return 6.0;
        }
        let j = cutoff_profile(s);
        j.d2 + 2.0 * j.d1 / s
    }

    pub fn bilaplacian(y: [f64; 3]) -> f64 {
        let s = norm(y);
        if s <= 1.0 {
            return 0.0;
        }
        let j = cutoff_profile(s);
        j.d4 + 4.0 * j.d3 / s
    }

    /// `R^2 phi(x / R)`.
    pub fn weight(&self, x: [f64; 3]) -> f64 {
        self.radius * self.radius * Self::phi(self.scaled(x))
    }

    fn scaled(&self, x: [f64; 3]) -> [f64; 3] {
        x.map(|c| c / self.radius)
    }
}

fn norm(y: [f64; 3]) -> f64 {
    (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt()
}

fn dot_grad(x: [f64; 3], du: [Complex64; 3]) -> Complex64 {
    du[0] * x[0] + du[1] * x[1] + du[2] * x[2]
}

/// `(||x u||^2, Im int (x . grad u) conj(u))`, positions measured from the box center.
pub fn variance_and_rate(f: &Field) -> Result<(f64, f64)> {
    f.ensure_finite()?;
    variance_with(f, &Gradient::of(f))
}

fn variance_with(f: &Field, grad: &Gradient) -> Result<(f64, f64)> {
    if f.grid().kind() == GridKind::Periodic3d {
        let frac = f.outer_shell_mass_fraction();
        if frac >= SHELL_TOL {
            return Err(Error::UntrustedVariance(frac));
        }
    }
    let grid = f.grid();
    let (mut var, mut rate) = (0.0, 0.0);
    for (i, u) in f.values().iter().enumerate() {
        let x = grid.position(i);
        let w = grid.weight(i);
        var += w * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) * u.norm_sqr();
        rate += w * (dot_grad(x, grad.at(i)) * u.conj()).im;
    }
    Ok((var, rate))
}

/// Localized virial quantities at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalVirial {
    pub radius: f64,
    /// `int R^2 phi(x/R) |u|^2`
    pub z: f64,
    /// `2R Im int (grad phi)(x/R) . grad u conj(u)`
    pub z_prime: f64,
    /// Right side of the localized virial identity.
    pub z_second: f64,
    /// `24 E - 4 ||grad u||^2` with the same pointwise gradient.
    pub virial_rhs: f64,
    /// `z_second - virial_rhs`.
    pub a_r: f64,
    /// `c (R^-2 ||u||^2_{|x|>=R} + ||u||^4_{L^4(|x|>=R)})`.
    pub a_r_bound: f64,
    pub exterior: ExteriorNorms,
}

pub fn z_r_and_second_derivative(f: &Field, cutoff: &Cutoff) -> Result<LocalVirial> {
    f.ensure_finite()?;
    Ok(local_virial_with(f, &Gradient::of(f), cutoff))
}

fn local_virial_with(f: &Field, grad: &Gradient, cutoff: &Cutoff) -> LocalVirial {
    let grid = f.grid();
    let r = cutoff.radius();
    let (mut z, mut zp, mut hess, mut quart, mut bil) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let (mut g_all, mut l4_all) = (0.0, 0.0);
    for (i, u) in f.values().iter().enumerate() {
        let x = grid.position(i);
        let w = grid.weight(i);
        let y = cutoff.scaled(x);
        let du = grad.at(i);
        let a = u.norm_sqr();
        let g2: f64 = du.iter().map(Complex64::norm_sqr).sum();
        g_all += w * g2;
        l4_all += w * a * a;
        if norm(y) >= 2.0 {
            continue;
        }
        z += w * r * r * Cutoff::phi(y) * a;
        zp += w * (dot_grad(Cutoff::gradient(y), du) * u.conj()).im;
        let h = Cutoff::hessian(y);
        let mut hq = 0.0;
        for (ja, row) in h.iter().enumerate() {
            for (kb, hv) in row.iter().enumerate() {
                hq += hv * (du[ja] * du[kb].conj()).re;
            }
        }
        hess += w * hq;
        quart += w * Cutoff::laplacian(y) * a * a;
        bil += w * Cutoff::bilaplacian(y) * a;
    }
    let z_second = 4.0 * hess - quart - bil / (r * r);
    let energy = 0.5 * g_all - 0.25 * l4_all;
    let virial_rhs = 24.0 * energy - 4.0 * g_all;
    let exterior = exterior_norms_with(f, grad, r);
    let a_r_bound = remainder_constant() * (exterior.mass / (r * r) + exterior.l4_4);
    LocalVirial {
        radius: r,
        z,
        z_prime: 2.0 * r * zp,
        z_second,
        virial_rhs,
        a_r: z_second - virial_rhs,
        a_r_bound,
        exterior,
    }
}

/// `||u||_{L^2(|x|>=R)} ||grad u||_{L^2(|x|>=R)} / (||Q|| ||grad Q||)`.
pub fn eta_geq_r(f: &Field, q: &GroundState, radius: f64) -> Result<f64> {
    f.ensure_finite()?;
    check_exterior_radius(f, radius)?;
    let ext = exterior_norms_with(f, &Gradient::of(f), radius);
    Ok(eta_from_exterior(&ext, q))
}

fn check_exterior_radius(f: &Field, radius: f64) -> Result<()> {
    let limit = f.grid().half_width();
    if !(radius > 0.0 && radius < limit) {
        return Err(Error::RadiusOutOfRange { radius, limit });
    }
    Ok(())
}

fn eta_from_exterior(ext: &ExteriorNorms, q: &GroundState) -> f64 {
    (ext.mass * ext.grad_sq).sqrt() / q.eta_scale()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundMode {
    FiniteVariance,
    Localized,
    Radial,
}

impl BoundMode {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundMode::FiniteVariance => "finite-variance",
            BoundMode::Localized => "local",
            BoundMode::Radial => "radial",
        }
    }
}

impl std::fmt::Display for BoundMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for BoundMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "finite-variance" | "finite_variance" => Ok(BoundMode::FiniteVariance),
            "local" | "localized" => Ok(BoundMode::Localized),
            "radial" => Ok(BoundMode::Radial),
            other => Err(Error::InvalidConfig(format!("unknown bound mode {other:?}"))),
        }
    }
}

/// Upper estimate `t_b` for the blow-up time and the inputs that produced it.
///
/// `r0`, `rprime0`, `radius` and `t_b_unit_mass` live in the frame where the
/// mass equals `M[Q]`; `t_b` is in the time units of the original data,
/// `t_b = beta^2 t_b_unit_mass` with `beta = M / M[Q]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlowupBound {
    pub mode: BoundMode,
    pub lambda: f64,
    pub gamma: Option<f64>,
    pub radius: Option<f64>,
    pub r0: f64,
    pub rprime0: f64,
    pub beta: f64,
    pub t_b_unit_mass: f64,
    pub t_b: f64,
    /// Constants in force: `(gamma0, c_R)` or `c_2`.
    pub constants: Vec<(&'static str, f64)>,
    /// Set for the localized bound, whose validity also needs the exterior
    /// smallness to hold for all time.
    pub conditional: bool,
}

impl BlowupBound {
    /// `t_b=… lambda=… mode=… r0=… rprime0=…`
    pub fn record(&self) -> String {
        let mut s = format!(
            "t_b={:.12} lambda={:.12} mode={} r0={:.12} rprime0={:.12}",
            self.t_b, self.lambda, self.mode, self.r0, self.rprime0
        );
        if self.beta != 1.0 {
            s.push_str(&format!(" beta={:.12} t_b_unit_mass={:.12}", self.beta, self.t_b_unit_mass));
        }
        if let Some(r) = self.radius {
            s.push_str(&format!(" R={r:.12}"));
        }
        if let Some(g) = self.gamma {
            s.push_str(&format!(" gamma={g}"));
        }
        for (k, v) in &self.constants {
            s.push_str(&format!(" {k}={v}"));
        }
        s
    }
}

/// Positive root of `r0 + r' t - t^2 / 2`: `r' + sqrt(r'^2 + 2 r0)`.
pub fn quadratic_blowup_time(r0: f64, rprime0: f64) -> f64 {
    rprime0 + (rprime0 * rprime0 + 2.0 * r0).sqrt()
}

/// Positive root of `r0 + r' t - t^2 / 4`: `2 r' + sqrt(4 r'^2 + 4 r0)`.
pub fn quarter_blowup_time(r0: f64, rprime0: f64) -> f64 {
    2.0 * rprime0 + (4.0 * rprime0 * rprime0 + 4.0 * r0).sqrt()
}

fn check_unit_mass(report: &InvariantReport, q: &GroundState) -> Result<()> {
    if ((report.mass - q.mass_sq()) / q.mass_sq()).abs() > MASS_TOL {
        return Err(Error::NotApplicable(format!(
            "mass {} differs from M[Q] = {}; rescale to unit mass first",
            report.mass,
            q.mass_sq()
        )));
    }
    Ok(())
}

fn lambda_above_threshold(report: &InvariantReport, q: &GroundState) -> Result<f64> {
    let me = report.me_ratio(q);
    let roots = solve_lambda(me).map_err(|_| Error::NotApplicable(format!("M E / (M[Q] E[Q]) = {me} is not below 1")))?;
    if report.eta < roots.lambda * (1.0 - ETA_TOL) {
        return Err(Error::NotApplicable(format!("eta(0) = {} is below lambda = {}", report.eta, roots.lambda)));
    }
    Ok(roots.lambda)
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 1.0 && lambda.is_finite()) {
        return Err(Error::NotApplicable(format!("lambda = {lambda} must exceed 1")));
    }
    Ok(())
}

/// Bound for finite-variance data of mass `M[Q]` above the threshold.
pub fn bound_finite_variance(report: &InvariantReport, var0: f64, rate0: f64, q: &GroundState) -> Result<BlowupBound> {
    check_unit_mass(report, q)?;
    let lambda = lambda_above_threshold(report, q)?;
    check_lambda(lambda)?;
    let scale = 48.0 * q.energy() * lambda * lambda * (lambda - 1.0);
    let r0 = var0 / scale;
    let rprime0 = 4.0 * rate0 / scale;
    let t = quadratic_blowup_time(r0, rprime0);
    Ok(BlowupBound {
        mode: BoundMode::FiniteVariance,
        lambda,
        gamma: None,
        radius: None,
        r0,
        rprime0,
        beta: 1.0,
        t_b_unit_mass: t,
        t_b: t,
        constants: Vec::new(),
        conditional: false,
    })
}

/// Constants of the localized bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalizedConstants {
    pub gamma0: f64,
    pub c_r: f64,
}

impl Default for LocalizedConstants {
    fn default() -> Self {
        Self { gamma0: GAMMA0_DEFAULT, c_r: C_R_DEFAULT }
    }
}

/// Bound for data whose exterior part stays below `gamma`; `z0` and
/// `zprime0` are `z_R(0)` and its time derivative.
#[allow(clippy::too_many_arguments)]
pub fn bound_localized(
    report: &InvariantReport,
    z0: f64,
    zprime0: f64,
    lambda: f64,
    gamma: f64,
    radius: f64,
    q: &GroundState,
    consts: LocalizedConstants,
) -> Result<BlowupBound> {
    check_unit_mass(report, q)?;
    check_lambda(lambda)?;
    let gmax = (lambda - 1.0).min(consts.gamma0);
    if !(gamma > 0.0 && gamma < gmax) {
        return Err(Error::NotApplicable(format!("gamma = {gamma} must lie in (0, {gmax})")));
    }
    let rmin = consts.c_r / gamma.sqrt();
    if !(radius >= rmin) {
        return Err(Error::NotApplicable(format!("R = {radius} is below c_R gamma^-1/2 = {rmin}")));
    }
    let scale = 48.0 * q.energy() * lambda * lambda * (lambda - 1.0 - gamma);
    let r0 = z0 / scale;
    let rprime0 = zprime0 / scale;
    let t = quadratic_blowup_time(r0, rprime0);
    Ok(BlowupBound {
        mode: BoundMode::Localized,
        lambda,
        gamma: Some(gamma),
        radius: Some(radius),
        r0,
        rprime0,
        beta: 1.0,
        t_b_unit_mass: t,
        t_b: t,
        constants: vec![("gamma0", consts.gamma0), ("c_R", consts.c_r)],
        conditional: true,
    })
}

/// `R = c2 max(1, 1 / sqrt(lambda (lambda - 1)))`.
pub fn radial_radius(lambda: f64, c2: f64) -> f64 {
    c2 * (1.0 / (lambda * (lambda - 1.0)).sqrt()).max(1.0)
}

/// Bound for radial data; `z0`, `zprime0` must be taken at `radial_radius(lambda, c2)`.
#[allow(clippy::too_many_arguments)]
pub fn bound_radial(
    report: &InvariantReport,
    kind: GridKind,
    z0: f64,
    zprime0: f64,
    lambda: f64,
    c2: f64,
    q: &GroundState,
) -> Result<BlowupBound> {
    if kind != GridKind::Radial1d {
        return Err(Error::WrongMode { expected: "radial1d" });
    }
    check_unit_mass(report, q)?;
    check_lambda(lambda)?;
    let scale = 48.0 * q.energy() * lambda * lambda * (lambda - 1.0);
    let r0 = z0 / scale;
    let rprime0 = zprime0 / scale;
    let t = quarter_blowup_time(r0, rprime0);
    Ok(BlowupBound {
        mode: BoundMode::Radial,
        lambda,
        gamma: None,
        radius: Some(radial_radius(lambda, c2)),
        r0,
        rprime0,
        beta: 1.0,
        t_b_unit_mass: t,
        t_b: t,
        constants: vec![("c2", c2)],
        conditional: false,
    })
}

/// Settings for [`blowup_bound`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundSettings {
    pub mode: BoundMode,
    /// Localized mode: `R` in the unit-mass frame.
    pub radius: Option<f64>,
    pub gamma: Option<f64>,
    pub localized: LocalizedConstants,
    pub c2: f64,
}

impl BoundSettings {
    pub fn new(mode: BoundMode) -> Self {
        Self { mode, radius: None, gamma: None, localized: LocalizedConstants::default(), c2: C2_DEFAULT }
    }
}

/// Evaluates a bound for data of any mass.
///
/// The data is mapped to `v(x) = beta u(beta x)` with `beta = M / M[Q]`
/// analytically: every input is a moment of `u`, so the rescaled moments
/// follow from the scaling laws and no resampling is needed. The returned
/// `t_b` is mapped back to the time of `u`.
pub fn blowup_bound(f: &Field, q: &GroundState, settings: &BoundSettings) -> Result<BlowupBound> {
    let report = compute_invariants(f, q)?;
    if !(report.mass > 0.0) {
        return Err(Error::ZeroMass);
    }
    let beta = report.mass / q.mass_sq();
    let unit = InvariantReport::from_norms(
        q.mass_sq(),
        beta * report.grad_norm_sq,
        beta * report.l4_norm_4,
        report.momentum,
        q,
    );
    let mut bound = match settings.mode {
        BoundMode::FiniteVariance => {
            let (var, rate) = variance_and_rate(f)?;
            bound_finite_variance(&unit, var / beta.powi(3), rate / beta, q)?
        }
        BoundMode::Localized => {
            let lambda = lambda_above_threshold(&unit, q)?;
            let radius = settings.radius.ok_or_else(|| Error::InvalidConfig("local mode needs R".into()))?;
            let gamma = settings.gamma.ok_or_else(|| Error::InvalidConfig("local mode needs gamma".into()))?;
            let lv = z_r_and_second_derivative(f, &Cutoff::new(beta * radius)?)?;
            bound_localized(&unit, lv.z / beta.powi(3), lv.z_prime / beta, lambda, gamma, radius, q, settings.localized)?
        }
        BoundMode::Radial => {
            if !f.grid().is_radial() {
                return Err(Error::WrongMode { expected: "radial1d" });
            }
            let lambda = lambda_above_threshold(&unit, q)?;
            let radius = radial_radius(lambda, settings.c2);
            let lv = z_r_and_second_derivative(f, &Cutoff::new(beta * radius)?)?;
            bound_radial(&unit, f.grid().kind(), lv.z / beta.powi(3), lv.z_prime / beta, lambda, settings.c2, q)?
        }
    };
    bound.beta = beta;
    bound.t_b = beta * beta * bound.t_b_unit_mass;
    Ok(bound)
}

/// One diagnostic sample along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VirialRow {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub momentum: [f64; 3],
    pub grad_sq: f64,
    pub l4_4: f64,
    pub eta: f64,
    /// `||x u||^2`; NaN when the boundary-mass check fails.
    pub variance: f64,
    /// `Im int (x . grad u) conj(u)`; NaN alongside `variance`.
    pub rprime: f64,
    pub z_r: f64,
    pub eta_geq_r: f64,
    pub a_r_bound: f64,
}

impl VirialRow {
    pub const HEADER: &'static str = "t,mass,energy,grad_sq,l4_4,eta,variance,rprime,z_R,eta_geq_R,A_R_bound";

    pub fn values(&self) -> [f64; 11] {
        [
            self.t,
            self.mass,
            self.energy,
            self.grad_sq,
            self.l4_4,
            self.eta,
            self.variance,
            self.rprime,
            self.z_r,
            self.eta_geq_r,
            self.a_r_bound,
        ]
    }
}

/// Diagnostic time series; the localized columns use `radius` when set.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VirialSeries {
    pub radius: Option<f64>,
    pub rows: Vec<VirialRow>,
}

impl VirialSeries {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(|r| r.t)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Samples every diagnostic column for `f`.
pub fn diagnostics_row(f: &Field, q: &GroundState, cutoff: Option<&Cutoff>, fft: Option<&Fft3>) -> VirialRow {
    let n = norms_with(f, fft);
    let report = n.report(q);
    let grad = Gradient::with_plan(f, fft);
    let (variance, rprime) = variance_with(f, &grad).unwrap_or((f64::NAN, f64::NAN));
    let (mut z_r, mut eta_r, mut a_bound) = (f64::NAN, f64::NAN, f64::NAN);
    if let Some(c) = cutoff {
        let lv = local_virial_with(f, &grad, c);
        z_r = lv.z;
        a_bound = lv.a_r_bound;
        if check_exterior_radius(f, c.radius()).is_ok() {
            eta_r = eta_from_exterior(&lv.exterior, q);
        }
    }
    VirialRow {
        t: f.time(),
        mass: report.mass,
        energy: report.energy,
        momentum: report.momentum,
        grad_sq: report.grad_norm_sq,
        l4_4: report.l4_norm_4,
        eta: report.eta,
        variance,
        rprime,
        z_r,
        eta_geq_r: eta_r,
        a_r_bound: a_bound,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transition_matches_both_ends() {
        let a = transition_jet(0.0);
        assert_eq!([a.value, a.d1, a.d2, a.d3, a.d4], [1.0, 2.0, 2.0, 0.0, 0.0]);
        let b = transition_jet(1.0);
        for v in [b.value, b.d1, b.d2, b.d3, b.d4] {
            assert!(v.abs() < 1e-9, "{b:?}");
        }
    }

    #[test]
    fn remainder_constant_value() {
        // sup of |bi-Laplacian| on the annulus, from a 20001-point scan of the
        // same polynomial in exact rational arithmetic
        assert!((remainder_constant() - 1543.4144059280993).abs() < 1e-3, "{}", remainder_constant());
    }

    #[test]
    fn quadratic_times() {
        assert_eq!(quadratic_blowup_time(2.0, 0.0), 2.0);
        assert_eq!(quadratic_blowup_time(0.0, 3.0), 6.0);
        assert_eq!(quarter_blowup_time(1.0, 0.0), 2.0);
    }

    #[test]
    fn mode_names_round_trip() {
        for m in [BoundMode::FiniteVariance, BoundMode::Localized, BoundMode::Radial] {
            assert_eq!(m.as_str().parse::<BoundMode>().unwrap(), m);
        }
    }
}
