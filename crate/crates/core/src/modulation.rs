//! Fitting a field against the phased, translated, rescaled soliton family,
//! and the mass-normalizing dilation.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{radial_gradient_norm_sq, Field};
use crate::grid::{Grid, GridKind};
use crate::groundstate::GroundState;
use crate::invariants::{compute_invariants, norms};
use crate::thresholds::me_curve;

const MAX_ITERATIONS: usize = 60;
const DECREMENT_TOL: f64 = 1e-10;
const MAX_BETA_UPDATES: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct ModulationFit {
    /// Phase in `[0, 2 pi)`.
    pub theta: f64,
    pub x0: [f64; 3],
    pub lambda: f64,
    pub beta: f64,
    /// `||u - S||_2`.
    pub resid_l2: f64,
    /// `||grad (u - S)||_2`.
    pub resid_h1dot: f64,
    /// Larger of the two closeness residuals in the hypotheses: the
    /// mass-energy gap over `lambda^3` and the `eta` gap over `lambda^2`
    /// (`lambda <= 1`) or `lambda`.
    pub rho_proxy: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl ModulationFit {
    /// `theta=… x0=(…,…,…) beta=… resid_l2=… resid_h1=…`
    pub fn record(&self) -> String {
        let mut s = format!(
            "theta={:.12} x0=({:.12},{:.12},{:.12}) beta={:.12} resid_l2={:.6e} resid_h1={:.6e}",
            self.theta, self.x0[0], self.x0[1], self.x0[2], self.beta, self.resid_l2, self.resid_h1dot
        );
        if !self.converged {
            s.push_str(" converged=false");
        }
        s
    }
}

/// The template `lambda^{3/2} beta^{-1} Q(lambda |x - c| / beta)` and its
/// derivative with respect to the center `c`.
struct Template<'a> {
    q: &'a GroundState,
    amp: f64,
    scale: f64,
}

impl Template<'_> {
    fn value(&self, d: [f64; 3]) -> f64 {
        let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        self.amp * self.q.value(self.scale * r)
    }

    /// `(S, dS/dc)` at offset `d = x - c`.
    fn jet(&self, d: [f64; 3]) -> (f64, [f64; 3]) {
        let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        let v = self.amp * self.q.value(self.scale * r);
        if r == 0.0 {
            return (v, [0.0; 3]);
        }
        let s = -self.amp * self.q.slope(self.scale * r) * self.scale / r;
        (v, d.map(|c| s * c))
    }
}

fn offset(x: [f64; 3], c: [f64; 3]) -> [f64; 3] {
    [x[0] - c[0], x[1] - c[1], x[2] - c[2]]
}

/// Overlap `<S_c, f>` and its gradient in `c`.
fn overlap(f: &Field, t: &Template, c: [f64; 3]) -> (Complex64, [Complex64; 3]) {
    let grid = f.grid();
    let mut acc = Complex64::default();
    let mut grad = [Complex64::default(); 3];
    for (i, u) in f.values().iter().enumerate() {
        let w = grid.weight(i);
        let (s, ds) = t.jet(offset(grid.position(i), c));
        acc += u * (w * s);
        for j in 0..3 {
            grad[j] += u * (w * ds[j]);
        }
    }
    (acc, grad)
}

/// `d |C|^2 / dc`.
fn objective_gradient(c: Complex64, dc: [Complex64; 3]) -> [f64; 3] {
    dc.map(|d| 2.0 * (c.conj() * d).re)
}

/// Fits `e^{i theta} lambda^{3/2} beta^{-1} Q(lambda (x / beta - x0))` to `f`
/// with `lambda` held fixed.
///
/// `beta` is `M[f] / M[Q]` up to quadrature: it is the scale at which the
/// sampled template has the grid mass of `f`.
pub fn fit_modulation(f: &Field, q: &GroundState, lambda: f64) -> Result<ModulationFit> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidConfig(format!("lambda must be positive, got {lambda}")));
    }
    let report = compute_invariants(f, q)?;
    if !(report.mass > 0.0) {
        return Err(Error::ZeroMass);
    }
    let grid = *f.grid();
    let template = |beta: f64| Template { q, amp: lambda.powf(1.5) / beta, scale: lambda / beta };

    // beta starts at M[f] / M[Q] and is refined so the sampled template
    // carries exactly the grid mass of f
    let mut beta = report.mass / q.mass_sq();
    let mut c = if grid.is_radial() { [0.0; 3] } else { centroid(f, report.mass) };
    let mut iterations = 0;
    let mut converged = true;
    let mut previous: Option<(f64, f64)> = None;
    for _ in 0..MAX_BETA_UPDATES {
        let t = template(beta);
        if !grid.is_radial() {
            let (next, its, ok) = fit_center(f, &t, c, report.mass);
            c = next;
            iterations += its;
            converged = ok;
        }
        // secant on log T(beta) - log M[f]; T is close to beta M[Q]
        let gap = (template_mass(&grid, &t, c) / report.mass).ln();
        let next = match previous {
            Some((b0, g0)) if gap != g0 => beta - gap * (beta - b0) / (gap - g0),
            _ => beta * (-gap).exp(),
        };
        previous = Some((beta, gap));
        let done = gap.abs() <= 1e-15 || (next - beta).abs() <= 1e-15 * beta;
        beta = next;
        if done {
            break;
        }
    }
    let t = template(beta);

    let overlap_c = overlap(f, &t, c).0;
    let theta = overlap_c.arg().rem_euclid(TAU);
    let theta = if theta >= TAU { 0.0 } else { theta };
    let phase = Complex64::from_polar(1.0, theta);
    let diff = Field::new(
        grid,
        f.values().iter().enumerate().map(|(i, u)| u - phase * t.value(offset(grid.position(i), c))).collect(),
        f.time(),
    )?;
    let resid_l2 = diff.mass().sqrt();
    let resid_h1dot = match grid.kind() {
        GridKind::Periodic3d => norms(&diff)?.grad_sq.sqrt(),
        GridKind::Radial1d => radial_gradient_norm_sq(&diff).sqrt(),
    };
    let me = report.me_ratio(q);
    let rho_me = (me - me_curve(lambda)).abs() / lambda.powi(3);
    let rho_eta = (report.eta - lambda).abs() / if lambda <= 1.0 { lambda * lambda } else { lambda };
    Ok(ModulationFit {
        theta,
        x0: c.map(|v| v / beta),
        lambda,
        beta,
        resid_l2,
        resid_h1dot,
        rho_proxy: rho_me.max(rho_eta),
        iterations,
        converged,
    })
}

/// Newton ascent of `|<S_c, f>|^2` over the center `c`.
fn fit_center(f: &Field, t: &Template, start: [f64; 3], mass: f64) -> ([f64; 3], usize, bool) {
    let mut c = start;
    let mut best = overlap(f, t, c).0.norm_sqr();
    let delta = 1e-4 / t.scale;
    for it in 1..=MAX_ITERATIONS {
        let (c0, d0) = overlap(f, t, c);
        let g = objective_gradient(c0, d0);
        let mut h = [[0.0; 3]; 3];
        for k in 0..3 {
            let mut cp = c;
            let mut cm = c;
            cp[k] += delta;
            cm[k] -= delta;
            let (a, da) = overlap(f, t, cp);
            let (b, db) = overlap(f, t, cm);
            let gp = objective_gradient(a, da);
            let gm = objective_gradient(b, db);
            for j in 0..3 {
                h[j][k] = (gp[j] - gm[j]) / (2.0 * delta);
            }
        }
        let step = newton_or_ascent(h, g, delta);
        let (mut next, mut value) = (c, best);
        let mut scale = 1.0;
        for _ in 0..30 {
            let trial = [c[0] + scale * step[0], c[1] + scale * step[1], c[2] + scale * step[2]];
            let v = overlap(f, t, trial).0.norm_sqr();
            if v >= best {
                next = trial;
                value = v;
                break;
            }
            scale *= 0.5;
        }
        let moved = ((next[0] - c[0]).powi(2) + (next[1] - c[1]).powi(2) + (next[2] - c[2]).powi(2)).sqrt();
        let gain = (value - best) / (mass * mass);
        c = next;
        best = value;
        if moved < DECREMENT_TOL && gain < DECREMENT_TOL {
            return (c, it, true);
        }
    }
    (c, MAX_ITERATIONS, false)
}

fn template_mass(grid: &Grid, t: &Template, c: [f64; 3]) -> f64 {
    (0..grid.len()).map(|i| grid.weight(i) * t.value(offset(grid.position(i), c)).powi(2)).sum()
}

fn centroid(f: &Field, mass: f64) -> [f64; 3] {
    let grid = f.grid();
    let mut c = [0.0; 3];
    for (i, u) in f.values().iter().enumerate() {
        let x = grid.position(i);
        let w = grid.weight(i) * u.norm_sqr();
        for j in 0..3 {
            c[j] += w * x[j];
        }
    }
    c.map(|v| v / mass)
}

/// Newton step `-H^{-1} g` when `H` is negative definite, otherwise a
/// gradient step of length `delta` uphill.
fn newton_or_ascent(h: [[f64; 3]; 3], g: [f64; 3], delta: f64) -> [f64; 3] {
    let sym = [
        [h[0][0], 0.5 * (h[0][1] + h[1][0]), 0.5 * (h[0][2] + h[2][0])],
        [0.5 * (h[0][1] + h[1][0]), h[1][1], 0.5 * (h[1][2] + h[2][1])],
        [0.5 * (h[0][2] + h[2][0]), 0.5 * (h[1][2] + h[2][1]), h[2][2]],
    ];
    // -H must be positive definite (leading minors)
    let m1 = -sym[0][0];
    let m2 = sym[0][0] * sym[1][1] - sym[0][1] * sym[1][0];
    let det = det3(sym);
    if m1 > 0.0 && m2 > 0.0 && -det > 0.0 {
        if let Some(x) = solve3(sym, g) {
            return x.map(|v| -v);
        }
    }
    let norm = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
    if norm == 0.0 {
        return [0.0; 3];
    }
    g.map(|v| delta * v / norm)
}

fn det3(a: [[f64; 3]; 3]) -> f64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let d = det3(a);
    if d == 0.0 || !d.is_finite() {
        return None;
    }
    let mut x = [0.0; 3];
    for (k, xk) in x.iter_mut().enumerate() {
        let mut m = a;
        for r in 0..3 {
            m[r][k] = b[r];
        }
        *xk = det3(m) / d;
    }
    Some(x)
}

/// `v(x) = beta u(beta x)` with `beta = M[u] / M[Q]`, so that `M[v] = M[Q]`.
///
/// Periodic fields are resampled by separable trigonometric interpolation,
/// radial fields by cubic interpolation; samples whose preimage leaves the
/// domain are zero.
pub fn rescale_to_unit_mass(f: &Field, q: &GroundState) -> Result<Field> {
    f.ensure_finite()?;
    let mass = f.mass();
    if !(mass > 0.0) {
        return Err(Error::ZeroMass);
    }
    dilate(f, mass / q.mass_sq())
}

/// `v(x) = beta u(beta x)`.
pub fn dilate(f: &Field, beta: f64) -> Result<Field> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidConfig(format!("dilation factor must be positive, got {beta}")));
    }
    let grid = *f.grid();
    let values = match grid.kind() {
        GridKind::Periodic3d => dilate_periodic(f, beta),
        GridKind::Radial1d => dilate_radial(f, beta),
    };
    let out = Field::new(grid, values, f.time())?;
    let shell = out.outer_shell_mass_fraction();
    if shell >= 1e-6 {
        return Err(Error::DomainTooSmall(format!(
            "dilated field puts {shell:.2e} of its mass in the outer tenth of the domain"
        )));
    }
    Ok(out)
}

/// Row `i` holds the weights giving `u(beta x_i)` from the samples `u(x_j)`.
fn trig_matrix(grid: &Grid, beta: f64) -> Vec<f64> {
    let n = grid.n();
    let l = grid.half_width();
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        let y = beta * grid.axis_coord(i);
        if y.abs() >= l {
            continue;
        }
        for j in 0..n {
            let d = (y - grid.axis_coord(j)) * PI / l;
            m[i * n + j] = dirichlet_kernel(d, n);
        }
    }
    m
}

/// `(1/n) (1 + 2 sum_{m=1}^{n/2-1} cos(m d) + cos(n d / 2))`.
fn dirichlet_kernel(d: f64, n: usize) -> f64 {
    let half = n / 2;
    let s = (0.5 * d).sin();
    if s.abs() < 1e-12 {
        let mut acc = 1.0 + (half as f64 * d).cos();
        for m in 1..half {
            acc += 2.0 * (m as f64 * d).cos();
        }
        return acc / n as f64;
    }
    // sum_{m=-(n/2-1)}^{n/2-1} cos(m d) = sin((n/2 - 1/2) d) / sin(d/2)
    let core = ((half as f64 - 0.5) * d).sin() / s;
    (core + (half as f64 * d).cos()) / n as f64
}

fn dilate_periodic(f: &Field, beta: f64) -> Vec<Complex64> {
    let grid = f.grid();
    let n = grid.n();
    let m = trig_matrix(grid, beta);
    let mut data = f.values().to_vec();
    let mut line = vec![Complex64::default(); n];
    let mut out = vec![Complex64::default(); n];
    for axis in 0..3 {
        let stride = [1, n, n * n][axis];
        for a in 0..n {
            for b in 0..n {
                let base = match axis {
                    0 => n * (a + n * b),
                    1 => a + n * n * b,
                    _ => a + n * b,
                };
                for k in 0..n {
                    line[k] = data[base + k * stride];
                }
                for (i, o) in out.iter_mut().enumerate() {
                    let row = &m[i * n..(i + 1) * n];
                    *o = row.iter().zip(&line).map(|(w, v)| v * *w).sum();
                }
                for k in 0..n {
                    data[base + k * stride] = out[k];
                }
            }
        }
    }
    data.iter_mut().for_each(|v| *v *= beta);
    data
}

fn dilate_radial(f: &Field, beta: f64) -> Vec<Complex64> {
    let grid = f.grid();
    let u = f.values();
    let n = u.len();
    let h = grid.spacing();
    let origin = (u[0] * 4.0 - u[1]) / 3.0;
    // sample at r = j h, j >= -n; even across the origin
    let at = |j: i64| -> Complex64 {
        match j {
            0 => origin,
            j if j < 0 => u[(-j - 1) as usize],
            j if (j as usize) <= n => u[j as usize - 1],
            _ => Complex64::default(),
        }
    };
    (0..n)
        .map(|i| {
            let r = beta * grid.radius(i);
            if r >= grid.half_width() {
                return Complex64::default();
            }
            let s = r / h;
            let j = s.floor() as i64;
            let t = s - j as f64;
            // cubic Lagrange through j-1 .. j+2
            let w = [
                -t * (t - 1.0) * (t - 2.0) / 6.0,
                (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
                -(t + 1.0) * t * (t - 2.0) / 2.0,
                (t + 1.0) * t * (t - 1.0) / 6.0,
            ];
            let v = at(j - 1) * w[0] + at(j) * w[1] + at(j + 1) * w[2] + at(j + 2) * w[3];
            v * beta
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dirichlet_kernel_interpolates_nodes() {
        let n = 16;
        for k in 0..n {
            let d = 2.0 * PI * k as f64 / n as f64;
            let expect = if k == 0 { 1.0 } else { 0.0 };
            assert!((dirichlet_kernel(d, n) - expect).abs() < 1e-13, "{k}");
        }
    }

    #[test]
    fn identity_dilation() {
        let g = Grid::periodic(8, 2.0).unwrap();
        let m = trig_matrix(&g, 1.0);
        for i in 0..8 {
            for j in 0..8 {
                assert!((m[i * 8 + j] - if i == j { 1.0 } else { 0.0 }).abs() < 1e-13);
            }
        }
    }
}
