//! Strang-split time stepping, adaptive step control and blow-up detection.
//!
//! Periodic fields take the linear substep exactly in Fourier space; radial
//! fields use Crank-Nicolson on `v = r u` with `v = 0` at both ends.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{radial_gradient_norm_sq, Field};
use crate::grid::{Grid, GridKind};
use crate::groundstate::GroundState;
use crate::spectral::{dealias_mask_1d, for_each_block, wavenumbers, Fft3};
use crate::virial::{diagnostics_row, Cutoff, VirialRow, VirialSeries};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveConfig {
    pub dt0: f64,
    pub t_end: f64,
    pub cfl_alpha: f64,
    pub blowup_factor: f64,
    /// Steps between snapshots; 0 disables them.
    pub snapshot_every: usize,
    /// Steps between diagnostic rows; 0 records only the first and last.
    pub diag_every: usize,
    pub dealias: bool,
    /// Radius of the localized columns of the diagnostics.
    pub virial_radius: Option<f64>,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            dt0: 1e-3,
            t_end: 1.0,
            cfl_alpha: 0.5,
            blowup_factor: 20.0,
            snapshot_every: 0,
            diag_every: 10,
            dealias: false,
            virial_radius: None,
        }
    }
}

impl EvolveConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.dt0 > 0.0 && self.dt0.is_finite()) {
            return bad(format!("dt0 must be positive, got {}", self.dt0));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be non-negative, got {}", self.t_end));
        }
        if !(self.cfl_alpha > 0.0 && self.cfl_alpha <= 1.0) {
            return bad(format!("cfl_alpha must lie in (0, 1], got {}", self.cfl_alpha));
        }
        if !(self.blowup_factor > 1.0) {
            return bad(format!("blowup_factor must exceed 1, got {}", self.blowup_factor));
        }
        if let Some(r) = self.virial_radius {
            Cutoff::new(r)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    ReachedTEnd,
    BlowupDetected,
    StepUnderflow,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::ReachedTEnd => "reached_t_end",
            Outcome::BlowupDetected => "blowup_detected",
            Outcome::StepUnderflow => "step_underflow",
        }
    }
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Result of [`evolve`].
///
/// `t_blowup_observed` is the end of the step on which `||grad u||` first
/// crossed the detection threshold. At fixed resolution the gradient
/// saturates, so this is a resolution-dependent estimate of the blow-up time,
/// not the blow-up time itself.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub outcome: Outcome,
    pub t_final: f64,
    pub t_blowup_observed: Option<f64>,
    pub max_grad: f64,
    pub steps: usize,
    pub diagnostics: VirialSeries,
    /// `(t, ||grad u||)` after every step.
    pub grad_history: Vec<(f64, f64)>,
    pub snapshots: Vec<Field>,
    pub final_field: Field,
}

/// Operator pieces of the split step for one grid.
pub struct Stepper {
    grid: Grid,
    fft: Option<Fft3>,
    k2: Vec<f64>,
    mask: Option<Vec<bool>>,
}

impl Stepper {
    pub fn new(grid: Grid, dealias: bool) -> Self {
        match grid.kind() {
            GridKind::Periodic3d => {
                let k = wavenumbers(grid.n(), grid.half_width());
                Self {
                    grid,
                    fft: Some(Fft3::new(grid.n())),
                    k2: k.iter().map(|v| v * v).collect(),
                    mask: dealias.then(|| dealias_mask_1d(grid.n())),
                }
            }
            GridKind::Radial1d => Self { grid, fft: None, k2: Vec::new(), mask: None },
        }
    }

    pub fn fft(&self) -> Option<&Fft3> {
        self.fft.as_ref()
    }

    /// `u <- u exp(i |u|^2 tau)`.
    pub fn nonlinear(&self, values: &mut [Complex64], tau: f64) {
        if tau == 0.0 {
            return;
        }
        let chunk = self.block_len();
        for_each_block(values, chunk, |_, block| {
            for v in block.iter_mut() {
                let (s, c) = (v.norm_sqr() * tau).sin_cos();
                *v *= Complex64::new(c, s);
            }
        });
    }

    /// Exact (periodic) or Crank-Nicolson (radial) flow of `i u_t + Laplacian u = 0`
    /// over `dt`; returns `||grad u||^2` of the result.
    pub fn linear(&self, values: &mut [Complex64], dt: f64) -> f64 {
        match self.grid.kind() {
            GridKind::Periodic3d => self.linear_spectral(values, dt),
            GridKind::Radial1d => {
                crank_nicolson(values, &self.grid, dt);
                let f = Field::new(self.grid, values.to_vec(), 0.0).expect("length matches grid");
                radial_gradient_norm_sq(&f)
            }
        }
    }

    fn block_len(&self) -> usize {
        match self.grid.kind() {
            GridKind::Periodic3d => self.grid.n() * self.grid.n(),
            GridKind::Radial1d => self.grid.n(),
        }
    }

    fn linear_spectral(&self, values: &mut [Complex64], dt: f64) -> f64 {
        let fft = self.fft.as_ref().expect("periodic stepper has a plan");
        let n = self.grid.n();
        fft.forward(values);
        let phase: Vec<Complex64> = self.k2.iter().map(|k2| Complex64::from_polar(1.0, -k2 * dt)).collect();
        let mask = self.mask.as_deref();
        let k2 = &self.k2;
        let keep = |i: usize| mask.is_none_or(|m| m[i]);
        let plane = n * n;
        let partial: Vec<f64> = {
            let sums = std::sync::Mutex::new(vec![0.0; n]);
            for_each_block(values, plane, |iz, block| {
                let mut acc = 0.0;
                for iy in 0..n {
                    let row = &mut block[iy * n..(iy + 1) * n];
                    let pyz = phase[iy] * phase[iz];
                    let kyz = k2[iy] + k2[iz];
                    let keep_yz = keep(iy) && keep(iz);
                    for (ix, v) in row.iter_mut().enumerate() {
                        if keep_yz && keep(ix) {
                            *v *= pyz * phase[ix];
                            acc += (kyz + k2[ix]) * v.norm_sqr();
                        } else {
                            *v = Complex64::default();
                        }
                    }
                }
                sums.lock().expect("no panics while held")[iz] = acc;
            });
            sums.into_inner().expect("no panics while held")
        };
        fft.inverse(values);
        partial.iter().sum::<f64>() * self.grid.weight(0) / values.len() as f64
    }

    /// One Strang step `N(dt/2) L(dt) N(dt/2)` in place.
    pub fn step_in_place(&self, values: &mut [Complex64], dt: f64) {
        self.nonlinear(values, 0.5 * dt);
        self.linear(values, dt);
        self.nonlinear(values, 0.5 * dt);
    }
}

/// One Strang step of the equation.
pub fn step(f: &Field, dt: f64) -> Result<Field> {
    step_with(&Stepper::new(*f.grid(), false), f, dt)
}

pub fn step_with(stepper: &Stepper, f: &Field, dt: f64) -> Result<Field> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidConfig(format!("dt must be positive, got {dt}")));
    }
    let mut out = f.clone();
    stepper.step_in_place(out.values_mut(), dt);
    if !out.is_finite() {
        return Err(Error::Overflow(f.time() + dt));
    }
    out.set_time(f.time() + dt);
    Ok(out)
}

/// Crank-Nicolson for `v_t = i v_rr` on `v = r u`, `v = 0` at `r = 0` and
/// at `r = r_max`; the last sample is pinned to zero.
fn crank_nicolson(u: &mut [Complex64], grid: &Grid, dt: f64) {
    let n = u.len();
    let h = grid.spacing();
    let m = n - 1;
    let sigma = Complex64::new(0.0, dt / (2.0 * h * h));
    let v: Vec<Complex64> = (0..m).map(|i| u[i] * grid.radius(i)).collect();
    let mut rhs: Vec<Complex64> = (0..m)
        .map(|i| {
            let left = if i > 0 { v[i - 1] } else { Complex64::default() };
            let right = if i + 1 < m { v[i + 1] } else { Complex64::default() };
            v[i] + sigma * (left - 2.0 * v[i] + right)
        })
        .collect();
    // Thomas algorithm for the constant tridiagonal (-sigma, 1 + 2 sigma, -sigma)
    let diag = Complex64::new(1.0, 0.0) + 2.0 * sigma;
    let off = -sigma;
    let mut c_prime = vec![Complex64::default(); m];
    let mut denom = diag;
    c_prime[0] = off / denom;
    rhs[0] /= denom;
    for i in 1..m {
        denom = diag - off * c_prime[i - 1];
        c_prime[i] = off / denom;
        rhs[i] = (rhs[i] - off * rhs[i - 1]) / denom;
    }
    for i in (0..m - 1).rev() {
        rhs[i] = rhs[i] - c_prime[i] * rhs[i + 1];
    }
    for i in 0..m {
        u[i] = rhs[i] / grid.radius(i);
    }
    u[n - 1] = Complex64::default();
}

/// Evolves `f0`, collecting snapshots in memory.
pub fn evolve(f0: &Field, cfg: &EvolveConfig, q: &GroundState) -> Result<RunResult> {
    let mut snaps = Vec::new();
    let mut result = evolve_with(f0, cfg, q, |f| {
        snaps.push(f.clone());
        Ok(())
    })?;
    result.snapshots = snaps;
    Ok(result)
}

/// Evolves `f0`, handing each snapshot to `on_snapshot` instead of storing it.
///
/// Consecutive nonlinear half-steps are fused, so the stored state between
/// steps is `N(dt/2)` ahead of the physical field; it is brought back in
/// step whenever the physical field is needed.
pub fn evolve_with(
    f0: &Field,
    cfg: &EvolveConfig,
    q: &GroundState,
    mut on_snapshot: impl FnMut(&Field) -> Result<()>,
) -> Result<RunResult> {
    cfg.validate()?;
    f0.ensure_finite()?;
    let stepper = Stepper::new(*f0.grid(), cfg.dealias);
    let cutoff = cfg.virial_radius.map(Cutoff::new).transpose()?;
    let row = |f: &Field| diagnostics_row(f, q, cutoff.as_ref(), stepper.fft());

    let mut u = f0.clone();
    let mut diagnostics = VirialSeries { radius: cfg.virial_radius, rows: vec![row(&u)] };
    let g0 = diagnostics.rows[0].grad_sq.sqrt();
    if !(g0 > 0.0) {
        return Err(Error::DegenerateInput("initial gradient norm vanishes".into()));
    }
    if cfg.snapshot_every > 0 {
        on_snapshot(&u)?;
    }
    let mut t = f0.time();
    let t_end = t + cfg.t_end;
    let mut g = g0;
    let mut max_grad = g0;
    let mut pending = 0.0;
    let mut steps = 0usize;
    let mut history = vec![(t, g0)];
    let mut outcome = Outcome::ReachedTEnd;
    let mut t_blowup = None;

    while t < t_end {
        let mut dt = cfg.dt0.min(cfg.cfl_alpha * cfg.dt0 * (g0 / g).powi(4));
        if dt < 1e-12 * cfg.dt0 {
            outcome = Outcome::StepUnderflow;
            break;
        }
        let last = t + dt >= t_end - 1e-6 * dt;
        if last {
            dt = t_end - t;
        }
        let values = u.values_mut();
        stepper.nonlinear(values, pending + 0.5 * dt);
        let grad_sq = stepper.linear(values, dt);
        pending = 0.5 * dt;
        t = if last { t_end } else { t + dt };
        steps += 1;
        g = grad_sq.sqrt();
        history.push((t, g));
        if g.is_finite() {
            max_grad = max_grad.max(g);
        }
        let blown = !g.is_finite() || g >= cfg.blowup_factor * g0;
        let diag_due = cfg.diag_every > 0 && steps % cfg.diag_every == 0;
        let snap_due = cfg.snapshot_every > 0 && steps % cfg.snapshot_every == 0;
        if blown || diag_due || snap_due || t >= t_end {
            stepper.nonlinear(u.values_mut(), pending);
            pending = 0.0;
            u.set_time(t);
            if blown || !u.is_finite() {
                outcome = Outcome::BlowupDetected;
                t_blowup = Some(t);
                if u.is_finite() {
                    diagnostics.rows.push(row(&u));
                }
                break;
            }
            if diag_due || t >= t_end {
                diagnostics.rows.push(row(&u));
            }
            if snap_due {
                on_snapshot(&u)?;
            }
        }
    }
    if pending != 0.0 {
        stepper.nonlinear(u.values_mut(), pending);
        u.set_time(t);
        if outcome == Outcome::StepUnderflow && u.is_finite() {
            diagnostics.rows.push(row(&u));
        }
    }
    Ok(RunResult {
        outcome,
        t_final: t,
        t_blowup_observed: t_blowup,
        max_grad,
        steps,
        diagnostics,
        grad_history: history,
        snapshots: Vec::new(),
        final_field: u,
    })
}

/// Largest drifts over a diagnostic series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservationReport {
    pub rows_used: usize,
    pub mass_rel_drift: f64,
    pub energy_rel_drift: f64,
    pub momentum_abs_drift: f64,
}

/// Drift of `M`, `E` (relative to the first row) and `P` (absolute).
///
/// On blow-up runs only the rows before the detection sample count, since
/// the last one is taken after the gradient has left the resolved range.
pub fn conservation_audit(diag: &VirialSeries, outcome: Outcome) -> Result<ConservationReport> {
    let mut rows: &[VirialRow] = &diag.rows;
    if outcome == Outcome::BlowupDetected && rows.len() > 2 {
        rows = &rows[..rows.len() - 1];
    }
    if rows.len() < 2 {
        return Err(Error::DegenerateInput("conservation audit needs at least two rows".into()));
    }
    let first = rows[0];
    let rel = |a: f64, b: f64| {
        if b == 0.0 {
            a.abs()
        } else {
            (a - b).abs() / b.abs()
        }
    };
    let mut rep = ConservationReport { rows_used: rows.len(), mass_rel_drift: 0.0, energy_rel_drift: 0.0, momentum_abs_drift: 0.0 };
    for r in rows {
        rep.mass_rel_drift = rep.mass_rel_drift.max(rel(r.mass, first.mass));
        rep.energy_rel_drift = rep.energy_rel_drift.max(rel(r.energy, first.energy));
        for j in 0..3 {
            rep.momentum_abs_drift = rep.momentum_abs_drift.max((r.momentum[j] - first.momentum[j]).abs());
        }
    }
    Ok(rep)
}

/// Power-law fit `||grad u|| = c (T* - t)^-p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub exponent: f64,
    pub t_star: f64,
    pub points: usize,
    /// Growth factor of `||grad u||` across the fitted window.
    pub growth: f64,
}

/// Fits the gradient history of a blow-up run over its last decade of growth
/// (or all growth available, if less). `T*` is scanned over a geometric set
/// of offsets past the last sample and chosen by least squares.
pub fn fit_blowup_rate(history: &[(f64, f64)]) -> Option<RateFit> {
    let &(t_last, g_last) = history.last()?;
    if !(g_last.is_finite() && g_last > 0.0) {
        return None;
    }
    let floor = g_last / 10.0;
    let start = history.iter().rposition(|&(_, g)| g < floor).map_or(0, |i| i + 1);
    let window: Vec<(f64, f64)> = history[start..].iter().copied().filter(|(_, g)| g.is_finite() && *g > 0.0).collect();
    if window.len() < 4 {
        return None;
    }
    let span = t_last - window[0].0;
    if !(span > 0.0) {
        return None;
    }
    let mut best: Option<(f64, f64, f64)> = None;
    let mut offset = span * 1e-6;
    while offset < span * 10.0 {
        let t_star = t_last + offset;
        let xs: Vec<f64> = window.iter().map(|(t, _)| (t_star - t).ln()).collect();
        let ys: Vec<f64> = window.iter().map(|(_, g)| g.ln()).collect();
        let (slope, resid) = least_squares(&xs, &ys);
        if best.is_none_or(|b| resid < b.2) {
            best = Some((-slope, t_star, resid));
        }
        offset *= 1.05;
    }
    let (p, t_star, _) = best?;
    Some(RateFit { exponent: p, t_star, points: window.len(), growth: g_last / window[0].1 })
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let resid = xs.iter().zip(ys).map(|(x, y)| (y - my - slope * (x - mx)).powi(2)).sum();
    (slope, resid)
}
