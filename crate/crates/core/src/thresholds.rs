//! Mass-energy dichotomy: the cubic `3 l^2 - 2 l^3 = me_ratio`, classification of
//! initial data and the Galilean boost that removes momentum.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::groundstate::GroundState;
use crate::invariants::{norms, InvariantReport};

pub const ROOT_TOL: f64 = 1e-12;

/// Ratios within this distance of 1 are treated as on the threshold line.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// `3 l^2 - 2 l^3`.
pub fn me_curve(lambda: f64) -> f64 {
    lambda * lambda * (3.0 - 2.0 * lambda)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaRoots {
    pub lambda_minus: Option<f64>,
    pub lambda: f64,
}

/// Relative allowance on `eta(0) >= lambda` and `eta(0) <= lambda_minus`.
///
/// Data of the form `a Q` sit exactly on a root. Against
/// [`GroundState::on_grid`] their `eta` is exact, but sampled `Q` only
/// satisfies the Pohozhaev identities to quadrature accuracy, so the roots
/// move by up to about `2e-4` relative at the default resolutions.
pub const ETA_TOL: f64 = 1e-3;

/// Roots of `3 l^2 - 2 l^3 = me_ratio`: `lambda_minus` on `[0, 1)` when the
/// ratio is non-negative and `lambda > 1` always.
pub fn solve_lambda(me_ratio: f64) -> Result<LambdaRoots> {
    if me_ratio.is_nan() {
        return Err(Error::DegenerateInput("me_ratio is NaN".into()));
    }
    if me_ratio >= 1.0 - BOUNDARY_TOL {
        return Err(Error::BoundaryExcluded(me_ratio));
    }
    if me_ratio == f64::NEG_INFINITY {
        return Err(Error::DegenerateInput("me_ratio is -inf".into()));
    }
    let g = |l: f64| me_curve(l) - me_ratio;
    let lambda_minus = (me_ratio >= 0.0).then(|| bisect(g, 0.0, 1.0));
    let mut hi = 2.0;
    while g(hi) > 0.0 {
        hi *= 2.0;
    }
    Ok(LambdaRoots { lambda_minus, lambda: bisect(g, 1.0, hi) })
}

/// Bisection on a sign change; runs until the bracket stops shrinking, which
/// is well inside `ROOT_TOL`.
fn bisect(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let s_lo = g(lo);
    if s_lo == 0.0 {
        return lo;
    }
    let s_lo = s_lo.signum();
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = g(mid);
        if v == 0.0 {
            return mid;
        }
        if v.signum() == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    debug_assert!(hi - lo <= ROOT_TOL * hi.max(1.0));
    if g(lo).abs() <= g(hi).abs() {
        lo
    } else {
        hi
    }
}

/// Boosts `f` by `xi0 = -P/M` so the result carries zero momentum.
pub fn galilean_reduce(f: &Field) -> Result<(Field, [f64; 3])> {
    let n = norms(f)?;
    if !(n.mass > 0.0) {
        return Err(Error::ZeroMass);
    }
    let xi0 = n.momentum.map(|p| -p / n.mass);
    if xi0 == [0.0; 3] || f.grid().is_radial() {
        return Ok((f.clone(), [0.0; 3]));
    }
    let grid = *f.grid();
    let values = f
        .values()
        .iter()
        .enumerate()
        .map(|(i, u)| {
            let x = grid.position(i);
            u * Complex64::from_polar(1.0, x[0] * xi0[0] + x[1] * xi0[1] + x[2] * xi0[2])
        })
        .collect();
    Ok((Field::new(grid, values, f.time())?, xi0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DichotomyCase {
    GlobalBounded,
    AboveThreshold,
    NotCovered,
}

impl DichotomyCase {
    pub fn as_str(self) -> &'static str {
        match self {
            DichotomyCase::GlobalBounded => "global_bounded",
            DichotomyCase::AboveThreshold => "above_threshold",
            DichotomyCase::NotCovered => "not_covered",
        }
    }
}

impl std::fmt::Display for DichotomyCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Comparison of the un-boosted data with the boosted data.
#[derive(Debug, Clone, PartialEq)]
pub struct GalileanCheck {
    pub eta_before: f64,
    pub case_before: Option<DichotomyCase>,
    /// `(eta^2 - eta~^2 - |P|^2 / (M_Q ||grad Q||^2)) / eta^2`; zero in the continuum.
    pub identity_residual: f64,
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub me_ratio: f64,
    pub lambda_minus: Option<f64>,
    pub lambda: Option<f64>,
    pub eta0: f64,
    pub case: DichotomyCase,
    pub galilean_applied: bool,
    pub xi0: [f64; 3],
    pub report: InvariantReport,
    pub galilean_check: Option<GalileanCheck>,
    pub diagnostic: Option<String>,
}

impl Classification {
    /// `me_ratio=… lambda_minus=… lambda=… eta0=… case=…`
    pub fn record(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "absent".to_string(), |x| format!("{x:.12}"));
        format!(
            "me_ratio={:.12} lambda_minus={} lambda={} eta0={:.12} case={}",
            self.me_ratio,
            opt(self.lambda_minus),
            opt(self.lambda),
            self.eta0,
            self.case
        )
    }
}

fn case_for(eta0: f64, roots: &LambdaRoots) -> DichotomyCase {
    if roots.lambda_minus.is_some_and(|lm| eta0 <= lm * (1.0 + ETA_TOL)) {
        DichotomyCase::GlobalBounded
    } else if eta0 >= roots.lambda * (1.0 - ETA_TOL) {
        DichotomyCase::AboveThreshold
    } else {
        DichotomyCase::NotCovered
    }
}

fn classify_report(report: InvariantReport, q: &GroundState) -> Result<(f64, LambdaRoots, DichotomyCase)> {
    let me = report.me_ratio(q);
    let roots = solve_lambda(me)?;
    Ok((me, roots, case_for(report.eta, &roots)))
}

/// Places `f` in the dichotomy, optionally after removing its momentum.
pub fn classify(f: &Field, q: &GroundState, apply_galilean: bool) -> Result<Classification> {
    let before = norms(f)?.report(q);
    let (report, xi0, check) = if apply_galilean {
        let (reduced, xi0) = galilean_reduce(f)?;
        let after = norms(&reduced)?.report(q);
        let case_before = classify_report(before, q).ok().map(|c| c.2);
        // eta^2 = eta~^2 + |P|^2 / (M_Q ||grad Q||^2)
        let gap = before.momentum_sq() / q.eta_scale().powi(2);
        let resid = if before.eta > 0.0 {
            (before.eta.powi(2) - after.eta.powi(2) - gap) / before.eta.powi(2)
        } else {
            0.0
        };
        let after_case = classify_report(after, q).ok().map(|c| c.2);
        let consistent = after.eta <= before.eta * (1.0 + 1e-12)
            && (case_before != Some(DichotomyCase::GlobalBounded) || after_case == Some(DichotomyCase::GlobalBounded));
        let check = GalileanCheck { eta_before: before.eta, case_before, identity_residual: resid, consistent };
        (after, xi0, Some(check))
    } else {
        (before, [0.0; 3], None)
    };
    let (me_ratio, roots, case) = classify_report(report, q)?;
    let mut diagnostic = None;
    if case == DichotomyCase::NotCovered {
        diagnostic = Some(format!(
            "eta0={} lies strictly between the roots; the continuum excludes this, so it is discretization error",
            report.eta
        ));
    }
    if let Some(c) = &check {
        if !c.consistent {
            let msg = format!("boost changed the case from {:?}", c.case_before);
            diagnostic = Some(diagnostic.map_or(msg.clone(), |d| format!("{d}; {msg}")));
        }
    }
    Ok(Classification {
        me_ratio,
        lambda_minus: roots.lambda_minus,
        lambda: Some(roots.lambda),
        eta0: report.eta,
        case,
        galilean_applied: apply_galilean,
        xi0,
        report,
        galilean_check: check,
        diagnostic,
    })
}
