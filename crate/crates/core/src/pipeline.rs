//! End-to-end run: classify, bound, evolve, compare.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::evolution::{evolve_with, Outcome, RunResult};
use crate::field::Field;
use crate::groundstate::GroundState;
use crate::io::{fmt17, write_nlsf, write_series_csv};
use crate::thresholds::{classify, galilean_reduce, Classification};
use crate::virial::{blowup_bound, eta_geq_r, BlowupBound, BoundMode, BoundSettings};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    BoundRespected,
    NoBlowupWithinHorizon,
    BoundNotApplicable,
    BoundViolated,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::BoundRespected => "bound_respected",
            Verdict::NoBlowupWithinHorizon => "no_blowup_within_horizon",
            Verdict::BoundNotApplicable => "bound_not_applicable",
            Verdict::BoundViolated => "bound_violated",
        }
    }

    /// Process exit status: 2 for a violated bound, 0 otherwise.
    pub fn exit_code(self) -> i32 {
        if self == Verdict::BoundViolated {
            2
        } else {
            0
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One requested bound and what became of it.
#[derive(Debug, Clone)]
pub struct BoundAttempt {
    pub mode: BoundMode,
    pub result: std::result::Result<BlowupBound, String>,
    /// Largest `eta_{>=beta R}` seen along the run, for the localized bound.
    pub exterior_max: Option<f64>,
}

impl BoundAttempt {
    /// Whether the bound enters the verdict. A localized bound whose
    /// exterior smallness failed along the run has no force.
    pub fn usable(&self) -> Option<&BlowupBound> {
        let b = self.result.as_ref().ok()?;
        match (b.gamma, self.exterior_max) {
            (Some(g), Some(m)) if m > g => None,
            _ => Some(b),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineVerdict {
    pub classification: std::result::Result<Classification, String>,
    pub bounds: Vec<BoundAttempt>,
    pub outcome: Outcome,
    pub t_final: f64,
    /// Observed blow-up time: detection time, or the end of the run when the
    /// step size collapsed.
    pub t_obs: Option<f64>,
    pub verdict: Verdict,
    pub provenance: Vec<(String, String)>,
}

impl PipelineVerdict {
    pub fn exit_code(&self) -> i32 {
        self.verdict.exit_code()
    }

    /// Plain-text report, one `key: value` item per line.
    pub fn record(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "verdict: {}", self.verdict);
        match &self.classification {
            Ok(c) => {
                let _ = writeln!(s, "classification: {}", c.record());
            }
            Err(e) => {
                let _ = writeln!(s, "classification: error {e}");
            }
        }
        for b in &self.bounds {
            match &b.result {
                Ok(x) => {
                    let _ = write!(s, "bound {}: {}", b.mode, x.record());
                    if let Some(m) = b.exterior_max {
                        let _ = write!(s, " exterior_max={}", fmt17(m));
                        if b.usable().is_none() {
                            s.push_str(" hypothesis_failed");
                        }
                    }
                    s.push('\n');
                }
                Err(e) => {
                    let _ = writeln!(s, "bound {}: not applicable ({e})", b.mode);
                }
            }
        }
        let _ = writeln!(s, "outcome: {}", self.outcome);
        let _ = writeln!(s, "t_final: {}", fmt17(self.t_final));
        match self.t_obs {
            Some(t) => {
                let _ = writeln!(s, "t_obs: {}", fmt17(t));
            }
            None => s.push_str("t_obs: none\n"),
        }
        for (k, v) in &self.provenance {
            for line in v.lines() {
                let _ = writeln!(s, "{k}: {line}");
            }
        }
        s
    }
}

/// Combines the run with the bounds.
///
/// A collapsed step is read as blow-up at the end of the run. Without
/// blow-up, a horizon that reaches past some `t_b` contradicts that bound.
pub fn decide(bounds: &[BoundAttempt], outcome: Outcome, t_final: f64, t_obs: Option<f64>) -> Verdict {
    let usable: Vec<&BlowupBound> = bounds.iter().filter_map(BoundAttempt::usable).collect();
    if usable.is_empty() {
        return match outcome {
            Outcome::ReachedTEnd => Verdict::NoBlowupWithinHorizon,
            _ => Verdict::BoundNotApplicable,
        };
    }
    let t_b = usable.iter().map(|b| b.t_b).fold(f64::INFINITY, f64::min);
    match t_obs {
        Some(t) if t <= t_b => Verdict::BoundRespected,
        Some(_) => Verdict::BoundViolated,
        None if t_final >= t_b => Verdict::BoundViolated,
        None => Verdict::NoBlowupWithinHorizon,
    }
}

fn settings(cfg: &RunConfig, mode: BoundMode) -> BoundSettings {
    BoundSettings {
        mode,
        radius: cfg.bound_radius,
        gamma: cfg.gamma,
        localized: cfg.localized,
        c2: cfg.c2,
    }
}

/// Runs the pipeline for `cfg` with a ground state already in hand. When
/// `out_dir` is given, writes `diagnostics.csv`, `final.nlsf`,
/// `snapshots/snap_NNNNNN.nlsf` and `verdict.txt` there.
pub fn run_pipeline_with(cfg: &RunConfig, q: &GroundState, out_dir: Option<&Path>) -> Result<PipelineVerdict> {
    let f0 = cfg.initial_field(q)?;
    let q = &cfg.reference(q)?;
    let classification = classify(&f0, q, cfg.galilean).map_err(|e| e.to_string());
    let reduced = if cfg.galilean { galilean_reduce(&f0)?.0 } else { f0.clone() };

    let mut bounds: Vec<BoundAttempt> = cfg
        .bound_modes()
        .into_iter()
        .map(|mode| {
            let result = match &classification {
                Err(e) => Err(e.clone()),
                Ok(_) => blowup_bound(&reduced, q, &settings(cfg, mode)).map_err(|e| e.to_string()),
            };
            BoundAttempt { mode, result, exterior_max: None }
        })
        .collect();

    let mut evolve_cfg = cfg.evolve;
    let exterior_radius = bounds.iter().find_map(|b| {
        let x = b.result.as_ref().ok()?;
        x.gamma.and(x.radius).map(|r| x.beta * r)
    });
    if evolve_cfg.virial_radius.is_none() {
        evolve_cfg.virial_radius = exterior_radius;
    }

    let snap_dir = match out_dir {
        Some(d) => {
            fs::create_dir_all(d)?;
            if evolve_cfg.snapshot_every > 0 {
                let s = d.join("snapshots");
                fs::create_dir_all(&s)?;
                Some(s)
            } else {
                None
            }
        }
        None => None,
    };
    let mut index = 0usize;
    let mut exterior_max: Option<f64> = None;
    let run: RunResult = evolve_with(&f0, &evolve_cfg, q, |f: &Field| {
        if let Some(dir) = &snap_dir {
            write_nlsf(dir.join(format!("snap_{index:06}.nlsf")), f)?;
        }
        index += 1;
        Ok(())
    })?;

    if let Some(r) = exterior_radius {
        for row in &run.diagnostics.rows {
            if row.eta_geq_r.is_finite() {
                exterior_max = Some(exterior_max.map_or(row.eta_geq_r, |m: f64| m.max(row.eta_geq_r)));
            }
        }
        if evolve_cfg.virial_radius != Some(r) {
            // Diagnostic columns were taken at another radius.
            let last = eta_geq_r(&run.final_field, q, r)?;
            exterior_max = Some(exterior_max.map_or(last, |m| m.max(last)).max(eta_geq_r(&f0, q, r)?));
        }
        for b in &mut bounds {
            if matches!(&b.result, Ok(x) if x.gamma.is_some()) {
                b.exterior_max = exterior_max;
            }
        }
    }

    let t_obs = match run.outcome {
        Outcome::BlowupDetected => run.t_blowup_observed,
        Outcome::StepUnderflow => Some(run.t_final),
        Outcome::ReachedTEnd => None,
    };
    let verdict = match &classification {
        Err(_) => Verdict::BoundNotApplicable,
        Ok(_) => decide(&bounds, run.outcome, run.t_final, t_obs),
    };

    let mut provenance = vec![
        ("nlslab".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("ground_state".to_string(), cfg.ground_state.describe()),
        ("grid".to_string(), format!("{} n={} L={}", cfg.kind, cfg.n, cfg.half_width)),
        ("reference".to_string(), if cfg.grid_reference { "grid" } else { "continuum" }.to_string()),
        ("steps".to_string(), run.steps.to_string()),
        ("max_grad".to_string(), fmt17(run.max_grad)),
    ];
    provenance.push(("config".to_string(), cfg.source.trim_end().to_string()));

    let report = PipelineVerdict {
        classification,
        bounds,
        outcome: run.outcome,
        t_final: run.t_final,
        t_obs,
        verdict,
        provenance,
    };
    if let Some(d) = out_dir {
        let mut csv = fs::File::create(d.join("diagnostics.csv"))?;
        write_series_csv(&mut csv, &run.diagnostics)?;
        write_nlsf(d.join("final.nlsf"), &run.final_field)?;
        fs::write(d.join("verdict.txt"), report.record())?;
    }
    Ok(report)
}

/// Loads or solves the ground state named by `cfg` and runs the pipeline.
pub fn run_pipeline(cfg: &RunConfig, out_dir: Option<&Path>) -> Result<PipelineVerdict> {
    let q = cfg.ground_state.load()?;
    run_pipeline_with(cfg, &q, out_dir)
}

/// [`run_pipeline`] on a configuration file.
pub fn run_pipeline_file(path: impl AsRef<Path>, out_dir: Option<&Path>) -> Result<PipelineVerdict> {
    let cfg = RunConfig::from_file(path)?;
    if cfg.evolve.t_end <= 0.0 {
        return Err(Error::InvalidConfig("pipeline needs t_end > 0".into()));
    }
    run_pipeline(&cfg, out_dir)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn attempt(t_b: f64) -> BoundAttempt {
        let b = BlowupBound {
            mode: BoundMode::FiniteVariance,
            lambda: 1.2,
            gamma: None,
            radius: None,
            r0: 1.0,
            rprime0: 0.0,
            beta: 1.0,
            t_b_unit_mass: t_b,
            t_b,
            constants: Vec::new(),
            conditional: false,
        };
        BoundAttempt { mode: b.mode, result: Ok(b), exterior_max: None }
    }

    #[test]
    fn decision_table() {
        let b = [attempt(2.0)];
        assert_eq!(decide(&b, Outcome::BlowupDetected, 1.5, Some(1.5)), Verdict::BoundRespected);
        assert_eq!(decide(&b, Outcome::BlowupDetected, 2.5, Some(2.5)), Verdict::BoundViolated);
        assert_eq!(decide(&b, Outcome::ReachedTEnd, 1.0, None), Verdict::NoBlowupWithinHorizon);
        assert_eq!(decide(&b, Outcome::ReachedTEnd, 3.0, None), Verdict::BoundViolated);
        assert_eq!(decide(&[], Outcome::ReachedTEnd, 3.0, None), Verdict::NoBlowupWithinHorizon);
        assert_eq!(decide(&[], Outcome::BlowupDetected, 3.0, Some(3.0)), Verdict::BoundNotApplicable);
        assert_eq!(Verdict::BoundViolated.exit_code(), 2);
        assert_eq!(Verdict::BoundRespected.exit_code(), 0);
    }

    #[test]
    fn failed_exterior_hypothesis_removes_the_bound() {
        let mut a = attempt(2.0);
        if let Ok(b) = &mut a.result {
            b.gamma = Some(0.05);
        }
        a.exterior_max = Some(0.2);
        assert!(a.usable().is_none());
        assert_eq!(decide(&[a], Outcome::ReachedTEnd, 3.0, None), Verdict::NoBlowupWithinHorizon);
    }
}
