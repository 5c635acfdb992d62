//! Line-oriented `key = value` run configuration.

use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::evolution::EvolveConfig;
use crate::field::Field;
use crate::grid::{Grid, GridKind};
use crate::groundstate::{sample_soliton, solve_ground_state, GroundState, SolitonParams};
use crate::io::{read_nlsf, read_nlsq};
use crate::virial::{BoundMode, LocalizedConstants, C2_DEFAULT};

/// Initial datum.
#[derive(Debug, Clone, PartialEq)]
pub enum InitSpec {
    /// `a Q`.
    Soliton { a: f64 },
    /// `A exp(-|x|^2 / (2 w^2))`.
    Gaussian { amp: f64, width: f64 },
    /// NLSF snapshot.
    File(PathBuf),
}

/// Where the ground state comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum GroundStateSource {
    Solve { r_max: f64, n: usize, tol: f64 },
    File(PathBuf),
}

impl GroundStateSource {
    pub fn load(&self) -> Result<GroundState> {
        match self {
            GroundStateSource::Solve { r_max, n, tol } => solve_ground_state(*r_max, *n, *tol),
            GroundStateSource::File(p) => read_nlsq(p),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            GroundStateSource::Solve { r_max, n, tol } => format!("solved rmax={r_max} n={n} tol={tol}"),
            GroundStateSource::File(p) => format!("file {}", p.display()),
        }
    }
}

impl Default for GroundStateSource {
    fn default() -> Self {
        GroundStateSource::Solve { r_max: 20.0, n: 16384, tol: 1e-12 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub kind: GridKind,
    pub n: usize,
    pub half_width: f64,
    pub init: InitSpec,
    pub evolve: EvolveConfig,
    pub galilean: bool,
    /// Bound modes to evaluate; empty means the default for the grid kind.
    pub modes: Vec<BoundMode>,
    /// `R` of the localized bound, in the unit-mass frame.
    pub bound_radius: Option<f64>,
    pub gamma: Option<f64>,
    pub localized: LocalizedConstants,
    pub c2: f64,
    pub ground_state: GroundStateSource,
    /// Measure ratios against `Q` sampled on the run grid.
    pub grid_reference: bool,
    /// The configuration text as read.
    pub source: String,
}

pub const PERIODIC_BLOWUP_FACTOR: f64 = 3.0;

pub const KEYS: &[(&str, &str)] = &[
    ("kind", "periodic3d | radial1d (default periodic3d)"),
    ("n", "points per axis (default 128 periodic, 8192 radial)"),
    ("L", "half-width of the box or r_max (default 16 periodic, 20 radial)"),
    ("dt0", "base time step (default 1e-3)"),
    ("t_end", "length of the run (default 1)"),
    ("cfl_alpha", "adaptive step factor in (0, 1] (default 0.5)"),
    ("blowup_factor", "detection threshold on ||grad u|| / ||grad u0|| (default 3 periodic, 20 radial)"),
    ("snapshot_every", "steps between NLSF snapshots, 0 for none (default 0)"),
    ("diag_every", "steps between diagnostic rows (default 10)"),
    ("dealias", "2/3-rule filtering, true | false (default false)"),
    ("init", "soliton a=<a> | gaussian A=<A> w=<w> | file <path>"),
    ("galilean", "remove momentum before classifying, true | false (default true)"),
    ("modes", "comma list of finite-variance, local, radial"),
    ("R", "radius of the localized bound (unit-mass frame)"),
    ("gamma", "exterior tolerance of the localized bound"),
    ("gamma0", "upper limit for gamma (default 0.125)"),
    ("c_R", "R must be at least c_R gamma^-1/2 (default 4)"),
    ("c2", "radial bound constant (default 10)"),
    ("virial_R", "radius of the localized diagnostic columns"),
    ("reference", "grid | continuum: norms of Q used in ratios (default grid)"),
    ("q_file", "NLSQ profile to use instead of solving"),
    ("q_rmax", "ground-state domain (default 20)"),
    ("q_n", "ground-state samples (default 16384)"),
    ("q_tol", "ground-state shooting tolerance (default 1e-12)"),
];

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::ConfigParse { line, message: message.into() }
}

fn num<T: std::str::FromStr>(v: &str, line: usize, key: &str) -> Result<T> {
    v.parse().map_err(|_| parse_err(line, format!("{key}: cannot parse {v:?}")))
}

fn flag(v: &str, line: usize, key: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(parse_err(line, format!("{key}: expected true or false, got {v:?}"))),
    }
}

fn parse_init(v: &str, line: usize, base: &Path) -> Result<InitSpec> {
    let mut words = v.split_whitespace();
    let head = words.next().ok_or_else(|| parse_err(line, "init: missing value"))?;
    if head == "file" {
        let rest: Vec<&str> = words.collect();
        if rest.is_empty() {
            return Err(parse_err(line, "init: file needs a path"));
        }
        return Ok(InitSpec::File(base.join(rest.join(" "))));
    }
    let mut params = std::collections::BTreeMap::new();
    for w in words {
        let (k, x) = w.split_once('=').ok_or_else(|| parse_err(line, format!("init: expected name=value, got {w:?}")))?;
        params.insert(k, num::<f64>(x, line, k)?);
    }
    let mut get = |k: &str| params.remove(k).ok_or_else(|| parse_err(line, format!("init {head}: missing {k}=")));
    let spec = match head {
        "soliton" => InitSpec::Soliton { a: get("a")? },
        "gaussian" => InitSpec::Gaussian { amp: get("A")?, width: get("w")? },
        _ => return Err(parse_err(line, format!("init: unknown kind {head:?}"))),
    };
    if let Some(k) = params.keys().next() {
        return Err(parse_err(line, format!("init {head}: unexpected parameter {k}")));
    }
    Ok(spec)
}

impl RunConfig {
    /// Parses `text`; relative paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        let mut kind = GridKind::Periodic3d;
        let (mut n, mut half_width) = (None, None);
        let mut init = None;
        let mut evolve = EvolveConfig::default();
        let mut galilean = true;
        let mut modes = Vec::new();
        let (mut bound_radius, mut gamma) = (None, None);
        let mut localized = LocalizedConstants::default();
        let mut c2 = C2_DEFAULT;
        let mut grid_reference = true;
        let (mut q_file, mut q_rmax, mut q_n, mut q_tol) = (None, 20.0, 16384, 1e-12);
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| parse_err(line, "expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(parse_err(line, format!("duplicate key {key}")));
            }
            match key {
                "kind" => {
                    kind = match value {
                        "periodic3d" => GridKind::Periodic3d,
                        "radial1d" => GridKind::Radial1d,
                        _ => return Err(parse_err(line, format!("kind: expected periodic3d or radial1d, got {value:?}"))),
                    }
                }
                "n" => n = Some(num(value, line, key)?),
                "L" => half_width = Some(num(value, line, key)?),
                "dt0" => evolve.dt0 = num(value, line, key)?,
                "t_end" => evolve.t_end = num(value, line, key)?,
                "cfl_alpha" => evolve.cfl_alpha = num(value, line, key)?,
                "blowup_factor" => evolve.blowup_factor = num(value, line, key)?,
                "snapshot_every" => evolve.snapshot_every = num(value, line, key)?,
                "diag_every" => evolve.diag_every = num(value, line, key)?,
                "dealias" => evolve.dealias = flag(value, line, key)?,
                "virial_R" => evolve.virial_radius = Some(num(value, line, key)?),
                "init" => init = Some(parse_init(value, line, base)?),
                "galilean" => galilean = flag(value, line, key)?,
                "modes" => {
                    for m in value.split(',').map(str::trim).filter(|m| !m.is_empty()) {
                        modes.push(m.parse::<BoundMode>().map_err(|e| parse_err(line, e.to_string()))?);
                    }
                }
                "R" => bound_radius = Some(num(value, line, key)?),
                "gamma" => gamma = Some(num(value, line, key)?),
                "gamma0" => localized.gamma0 = num(value, line, key)?,
                "c_R" => localized.c_r = num(value, line, key)?,
                "c2" => c2 = num(value, line, key)?,
                "reference" => {
                    grid_reference = match value {
                        "grid" => true,
                        "continuum" => false,
                        _ => return Err(parse_err(line, format!("reference: expected grid or continuum, got {value:?}"))),
                    }
                }
                "q_file" => q_file = Some(base.join(value)),
                "q_rmax" => q_rmax = num(value, line, key)?,
                "q_n" => q_n = num(value, line, key)?,
                "q_tol" => q_tol = num(value, line, key)?,
                _ => return Err(parse_err(line, format!("unknown key {key:?}"))),
            }
        }
        if kind == GridKind::Periodic3d && !seen.contains("blowup_factor") {
            // at n = 128 the resolved gradient saturates near 5 ||grad u0||
            evolve.blowup_factor = PERIODIC_BLOWUP_FACTOR;
        }
        let init = init.ok_or_else(|| parse_err(text.lines().count().max(1), "missing required key init"))?;
        let (dn, dl) = match kind {
            GridKind::Periodic3d => (128, 16.0),
            GridKind::Radial1d => (8192, 20.0),
        };
        let ground_state = match q_file {
            Some(p) => GroundStateSource::File(p),
            None => GroundStateSource::Solve { r_max: q_rmax, n: q_n, tol: q_tol },
        };
        let cfg = RunConfig {
            kind,
            n: n.unwrap_or(dn),
            half_width: half_width.unwrap_or(dl),
            init,
            evolve,
            galilean,
            modes,
            bound_radius,
            gamma,
            localized,
            c2,
            ground_state,
            grid_reference,
            source: text.to_string(),
        };
        cfg.grid()?;
        cfg.evolve.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().map_or_else(|| PathBuf::from("."), Path::to_path_buf);
        Self::parse(&text, &base)
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.kind, self.n, self.half_width)
    }

    /// Bound modes to evaluate: the configured list, or the natural one for
    /// the grid plus `local` when `R` and `gamma` are set.
    pub fn bound_modes(&self) -> Vec<BoundMode> {
        if !self.modes.is_empty() {
            return self.modes.clone();
        }
        let mut m = vec![match self.kind {
            GridKind::Periodic3d => BoundMode::FiniteVariance,
            GridKind::Radial1d => BoundMode::Radial,
        }];
        if self.bound_radius.is_some() && self.gamma.is_some() {
            m.push(BoundMode::Localized);
        }
        m
    }

    /// `q` as the ratios of this run should see it.
    pub fn reference(&self, q: &GroundState) -> Result<GroundState> {
        if self.grid_reference {
            q.on_grid(&self.grid()?)
        } else {
            Ok(q.continuum())
        }
    }

    /// Samples the initial datum.
    pub fn initial_field(&self, q: &GroundState) -> Result<Field> {
        let grid = self.grid()?;
        match &self.init {
            InitSpec::Soliton { a } => {
                Ok(sample_soliton(q, &grid, SolitonParams::default())?.scaled(Complex64::new(*a, 0.0)))
            }
            InitSpec::Gaussian { amp, width } => {
                if !(*width > 0.0) {
                    return Err(Error::InvalidConfig(format!("gaussian width must be positive, got {width}")));
                }
                let s = 0.5 / (width * width);
                Ok(Field::from_fn(grid, |x| {
                    Complex64::new(amp * (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) * s).exp(), 0.0)
                }))
            }
            InitSpec::File(p) => {
                let f = read_nlsf(p)?;
                if *f.grid() != grid {
                    return Err(Error::InvalidConfig(format!(
                        "{} holds a {:?} grid with n={} L={}, the config asks for {:?} n={} L={}",
                        p.display(),
                        f.grid().kind(),
                        f.grid().n(),
                        f.grid().half_width(),
                        self.kind,
                        self.n,
                        self.half_width
                    )));
                }
                Ok(f)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_example() {
        let text = "# comment\nkind = radial1d\nn = 1024\nL = 20\ndt0 = 1e-3 # trailing\nt_end=2\n\
                    init = soliton a=1.2\nmodes = radial, finite-variance\ndealias = false\n";
        let c = RunConfig::parse(text, Path::new("/tmp")).unwrap();
        assert_eq!(c.kind, GridKind::Radial1d);
        assert_eq!((c.n, c.half_width, c.evolve.t_end), (1024, 20.0, 2.0));
        assert_eq!(c.init, InitSpec::Soliton { a: 1.2 });
        assert_eq!(c.modes, vec![BoundMode::Radial, BoundMode::FiniteVariance]);
    }

    #[test]
    fn errors_name_the_line() {
        let cases = [
            ("init = soliton a=1\nbogus = 3\n", 2),
            ("init = soliton a=1\nn = x\n", 2),
            ("init = soliton\n", 1),
            ("n = 64\nn = 64\ninit = soliton a=1\n", 2),
            ("init = wave k=1\n", 1),
            ("init gaussian\n", 1),
        ];
        for (text, line) in cases {
            match RunConfig::parse(text, Path::new(".")) {
                Err(Error::ConfigParse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn file_paths_resolve_against_the_config() {
        let c = RunConfig::parse("init = file data/u0.nlsf\nq_file = q.nlsq\n", Path::new("/runs")).unwrap();
        assert_eq!(c.init, InitSpec::File(PathBuf::from("/runs/data/u0.nlsf")));
        assert_eq!(c.ground_state, GroundStateSource::File(PathBuf::from("/runs/q.nlsq")));
    }
}
