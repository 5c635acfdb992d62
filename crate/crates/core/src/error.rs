use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("GN quotient undefined for a field with zero mass or zero gradient")]
    UndefinedRatio,
    #[error("shooting failed: {0}")]
    SolverFailure(String),
    #[error(
        "ground state failed certification: grad/mass - 3 = {grad_residual:e}, \
         l4/mass - 4 = {l4_residual:e}, E/grad - 1/6 = {energy_residual:e}"
    )]
    Certification {
        grad_residual: f64,
        l4_residual: f64,
        energy_residual: f64,
    },
    #[error("domain too small: {0}")]
    DomainTooSmall(String),
    #[error("mass-energy ratio {0} is not below the ground-state threshold 1")]
    BoundaryExcluded(f64),
    #[error("transform undefined for a field with zero mass")]
    ZeroMass,
    #[error("variance untrusted: {0:.3e} of the mass sits in the outer shell of the box")]
    UntrustedVariance(f64),
    #[error("radius {radius} outside the admissible range (0, {limit})")]
    RadiusOutOfRange { radius: f64, limit: f64 },
    #[error("bound not applicable: {0}")]
    NotApplicable(String),
    #[error("operation requires a {expected} field")]
    WrongMode { expected: &'static str },
    #[error("non-finite values produced at t = {0}")]
    Overflow(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("config line {line}: {message}")]
    ConfigParse { line: usize, message: String },
    #[error("bad magic bytes, expected {expected:?}")]
    BadMagic { expected: &'static str },
    #[error("unsupported format version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("truncated file: needed {needed} bytes at offset {offset}, file has {len}")]
    Truncated { offset: usize, needed: usize, len: usize },
    #[error("malformed file: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
