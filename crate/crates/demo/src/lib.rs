//! WebAssembly bindings for the static page in `www/`.
//!
//! Everything runs on the radial grid so a browser tab stays responsive.
//! The `Lab` methods return flat `f64` arrays; the layouts are given on
//! each method.

use nlslab::{
    classify, evolve, sample_soliton, solve_ground_state, DichotomyCase, EvolveConfig, Field, GroundState, Grid,
    SolitonParams,
};
use num_complex::Complex64;
use wasm_bindgen::prelude::*;

pub const R_MAX: f64 = 20.0;

/// Initial data the page can build.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Datum {
    Soliton { a: f64 },
    Gaussian { amp: f64, width: f64 },
}

impl Datum {
    fn sample(self, q: &GroundState, grid: &Grid) -> Result<Field, String> {
        match self {
            Datum::Soliton { a } => Ok(sample_soliton(q, grid, SolitonParams::default())
                .map_err(|e| e.to_string())?
                .scaled(Complex64::new(a, 0.0))),
            Datum::Gaussian { amp, width } => {
                if !(width > 0.0) {
                    return Err(format!("width must be positive, got {width}"));
                }
                let s = 0.5 / (width * width);
                Ok(Field::from_fn(*grid, |x| Complex64::new(amp * (-x[0] * x[0] * s).exp(), 0.0)))
            }
        }
    }
}

fn case_code(c: DichotomyCase) -> f64 {
    match c {
        DichotomyCase::GlobalBounded => 1.0,
        DichotomyCase::AboveThreshold => 2.0,
        DichotomyCase::NotCovered => 0.0,
    }
}

/// Ground state and run grid shared by the page's operations.
pub struct Core {
    q: GroundState,
    grid: Grid,
}

impl Core {
    pub fn new(n: usize) -> Result<Self, String> {
        let q = solve_ground_state(R_MAX, n, 1e-12).map_err(|e| e.to_string())?;
        let grid = Grid::radial(n, R_MAX).map_err(|e| e.to_string())?;
        let q = q.on_grid(&grid).map_err(|e| e.to_string())?;
        Ok(Self { q, grid })
    }

    /// `[r0, Q(r0), r1, Q(r1), ...]` at every `stride`-th sample.
    pub fn profile(&self, stride: usize) -> Vec<f64> {
        let stride = stride.max(1);
        self.q.radii().zip(self.q.profile()).step_by(stride).flat_map(|(r, v)| [r, *v]).collect()
    }

    /// `[Q(0), M[Q], ||grad Q||^2, ||Q||_4^4, E[Q], c_GN]`.
    pub fn norms(&self) -> Vec<f64> {
        let (m, g, l) = self.q.profile_norms();
        vec![self.q.shoot_value(), m, g, l, 0.5 * g - 0.25 * l, 4.0 / (3.0 * (m * g).sqrt())]
    }

    /// `[eta0, me_ratio, lambda_minus, lambda, case]`; absent roots are NaN,
    /// case is 1 (bounded), 2 (above threshold) or 0 (not covered).
    pub fn classify(&self, d: Datum) -> Result<Vec<f64>, String> {
        let f = d.sample(&self.q, &self.grid)?;
        let c = classify(&f, &self.q, false).map_err(|e| e.to_string())?;
        Ok(vec![c.eta0, c.me_ratio, c.lambda_minus.unwrap_or(f64::NAN), c.lambda.unwrap_or(f64::NAN), case_code(c.case)])
    }

    /// `[t0, eta0, t1, eta1, ...]` followed by the outcome code
    /// (0 reached t_end, 1 blow-up detected, 2 step underflow).
    pub fn eta_series(&self, d: Datum, t_end: f64, dt0: f64) -> Result<Vec<f64>, String> {
        let f = d.sample(&self.q, &self.grid)?;
        let cfg = EvolveConfig { dt0, t_end, diag_every: 5, blowup_factor: 10.0, ..Default::default() };
        let run = evolve(&f, &cfg, &self.q).map_err(|e| e.to_string())?;
        let mut out: Vec<f64> = run.diagnostics.rows.iter().flat_map(|r| [r.t, r.eta]).collect();
        out.push(match run.outcome {
            nlslab::Outcome::ReachedTEnd => 0.0,
            nlslab::Outcome::BlowupDetected => 1.0,
            nlslab::Outcome::StepUnderflow => 2.0,
        });
        Ok(out)
    }
}

#[wasm_bindgen]
pub struct Lab {
    core: Core,
}

fn datum(kind: &str, p1: f64, p2: f64) -> Result<Datum, JsError> {
    match kind {
        "soliton" => Ok(Datum::Soliton { a: p1 }),
        "gaussian" => Ok(Datum::Gaussian { amp: p1, width: p2 }),
        _ => Err(JsError::new(&format!("unknown datum {kind:?}"))),
    }
}

#[wasm_bindgen]
impl Lab {
    /// Solves `Q` on `n` radial samples over `[0, 20]`.
    #[wasm_bindgen(constructor)]
    pub fn new(n: usize) -> Result<Lab, JsError> {
        Core::new(n).map(|core| Lab { core }).map_err(|e| JsError::new(&e))
    }

    pub fn profile(&self, stride: usize) -> Vec<f64> {
        self.core.profile(stride)
    }

    pub fn norms(&self) -> Vec<f64> {
        self.core.norms()
    }

    /// `kind` is `soliton` (`p1 = a`) or `gaussian` (`p1 = A`, `p2 = w`).
    pub fn classify(&self, kind: &str, p1: f64, p2: f64) -> Result<Vec<f64>, JsError> {
        self.core.classify(datum(kind, p1, p2)?).map_err(|e| JsError::new(&e))
    }

    #[wasm_bindgen(js_name = etaSeries)]
    pub fn eta_series(&self, kind: &str, p1: f64, p2: f64, t_end: f64, dt0: f64) -> Result<Vec<f64>, JsError> {
        self.core.eta_series(datum(kind, p1, p2)?, t_end, dt0).map_err(|e| JsError::new(&e))
    }
}
