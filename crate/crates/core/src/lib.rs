pub mod config;
pub mod error;
pub mod evolution;
pub mod field;
pub mod grid;
pub mod groundstate;
pub mod invariants;
pub mod io;
pub mod modulation;
pub mod pipeline;
pub mod spectral;
pub mod thresholds;
pub mod virial;

pub use error::{Error, Result};
pub use field::Field;
pub use grid::{Grid, GridKind};
pub use groundstate::{sample_soliton, solve_ground_state, GroundState, ShootingConfig, SolitonParams};
pub use invariants::{compute_invariants, gn_functional, norms, InvariantReport, Norms};
pub use thresholds::{classify, galilean_reduce, solve_lambda, Classification, DichotomyCase, LambdaRoots};
pub use config::{InitSpec, RunConfig};
pub use evolution::{evolve, EvolveConfig, Outcome, RunResult};
pub use modulation::{fit_modulation, ModulationFit};
pub use pipeline::{run_pipeline, PipelineVerdict, Verdict};
pub use virial::{blowup_bound, BlowupBound, BoundMode, BoundSettings};
