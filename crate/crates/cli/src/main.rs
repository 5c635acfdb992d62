//! `nlslab` command-line front end.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use nlslab::config::RunConfig;
use nlslab::evolution::{conservation_audit, evolve_with, Outcome};
use nlslab::groundstate::{GroundState, ShootingConfig};
use nlslab::io::{fmt17, read_nlsf, read_nlsq, write_nlsf, write_nlsq, write_series_csv};
use nlslab::modulation::{fit_modulation, rescale_to_unit_mass};
use nlslab::pipeline::run_pipeline_with;
use nlslab::thresholds::{classify, galilean_reduce};
use nlslab::virial::{
    blowup_bound, variance_and_rate, z_r_and_second_derivative, BoundMode, BoundSettings, Cutoff, LocalizedConstants,
    C2_DEFAULT, C_R_DEFAULT, GAMMA0_DEFAULT,
};
use nlslab::{norms, Error, Field};

#[derive(Parser)]
#[command(name = "nlslab", version, about = "Numerical lab for the 3D focusing cubic NLS")]
struct Cli {
    /// Worker threads for parallel loops; defaults to all cores.
    #[arg(long, env = "NLSLAB_THREADS", global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the ground state Q by shooting and certify it.
    Groundstate(GroundstateArgs),
    /// Place a field in the mass-energy dichotomy.
    Classify(ClassifyArgs),
    /// Evolve a configured initial datum.
    Evolve(EvolveArgs),
    /// Variance and localized virial quantities of a snapshot.
    Virial(VirialArgs),
    /// Upper bound on the blow-up time of a snapshot.
    Bound(BoundArgs),
    /// Fit a modulated soliton to a snapshot.
    Modulate(ModulateArgs),
    /// Classify, bound, evolve and compare, from one config file.
    Pipeline(PipelineArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Reference {
    /// Norms of Q sampled on the field's grid.
    Grid,
    /// Norms of the tabulated profile.
    Continuum,
}

#[derive(Args)]
struct QArgs {
    /// NLSQ ground-state profile; solved with default settings when absent.
    #[arg(long, value_name = "NLSQ")]
    q: Option<PathBuf>,
    /// Which norms of Q enter eta and the mass-energy ratio.
    #[arg(long, value_enum, default_value = "grid")]
    reference: Reference,
}

impl QArgs {
    fn load(&self) -> Result<GroundState, Error> {
        match &self.q {
            Some(p) => read_nlsq(p),
            None => ShootingConfig { n: 16384, ..Default::default() }.solve(),
        }
    }

    fn load_for(&self, f: &Field) -> Result<GroundState, Error> {
        let q = self.load()?;
        match self.reference {
            Reference::Grid => q.on_grid(f.grid()),
            Reference::Continuum => Ok(q),
        }
    }
}

#[derive(Args)]
struct GroundstateArgs {
    /// Outer radius of the shooting domain.
    #[arg(long, default_value_t = 20.0)]
    rmax: f64,
    /// Number of radial samples.
    #[arg(long, default_value_t = 16384)]
    n: usize,
    /// Bisection tolerance on the shooting value Q(0).
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Largest accepted Pohozhaev residual.
    #[arg(long, default_value_t = nlslab::groundstate::DEFAULT_CERT_TOL)]
    cert_tol: f64,
    /// Write the profile here in NLSQ format.
    #[arg(long, value_name = "NLSQ")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ClassifyArgs {
    /// NLSF snapshot to classify.
    #[arg(long, value_name = "NLSF", conflicts_with = "config", required_unless_present = "config")]
    input: Option<PathBuf>,
    /// Run config whose initial datum is classified instead.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Classify the data as given, without removing its momentum.
    #[arg(long)]
    no_galilean: bool,
    #[command(flatten)]
    q: QArgs,
}

#[derive(Args)]
struct EvolveArgs {
    /// Run config (`key = value` lines).
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Diagnostic series CSV.
    #[arg(long, value_name = "CSV")]
    out_diag: Option<PathBuf>,
    /// Directory for NLSF snapshots (every `snapshot_every` steps).
    #[arg(long, value_name = "DIR")]
    out_snap: Option<PathBuf>,
    /// Final state in NLSF format.
    #[arg(long, value_name = "NLSF")]
    out_final: Option<PathBuf>,
    #[command(flatten)]
    q: QArgs,
}

#[derive(Args)]
struct VirialArgs {
    /// NLSF snapshot.
    #[arg(long, value_name = "NLSF")]
    input: PathBuf,
    /// Radius of the localized quantities; omitted means variance only.
    #[arg(long = "R", value_name = "LEN")]
    radius: Option<f64>,
    #[command(flatten)]
    q: QArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    FiniteVariance,
    Local,
    Radial,
}

impl From<ModeArg> for BoundMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::FiniteVariance => BoundMode::FiniteVariance,
            ModeArg::Local => BoundMode::Localized,
            ModeArg::Radial => BoundMode::Radial,
        }
    }
}

#[derive(Args)]
struct BoundArgs {
    /// NLSF snapshot taken as initial datum.
    #[arg(long, value_name = "NLSF")]
    input: PathBuf,
    /// Which bound to evaluate.
    #[arg(long, value_enum)]
    mode: ModeArg,
    /// Radius of the localized bound, in the unit-mass frame.
    #[arg(long = "R", value_name = "LEN", required_if_eq("mode", "local"))]
    radius: Option<f64>,
    /// Exterior tolerance of the localized bound.
    #[arg(long, required_if_eq("mode", "local"))]
    gamma: Option<f64>,
    /// Upper limit for gamma in the localized bound.
    #[arg(long, default_value_t = GAMMA0_DEFAULT)]
    gamma0: f64,
    /// The localized bound needs R >= c_R gamma^(-1/2).
    #[arg(long = "c-R", default_value_t = C_R_DEFAULT)]
    c_r: f64,
    /// Constant of the radial bound.
    #[arg(long, default_value_t = C2_DEFAULT)]
    c2: f64,
    /// Bound the data as given, without removing its momentum.
    #[arg(long)]
    no_galilean: bool,
    #[command(flatten)]
    q: QArgs,
}

#[derive(Args)]
struct ModulateArgs {
    /// NLSF snapshot.
    #[arg(long, value_name = "NLSF")]
    input: PathBuf,
    /// Scaling of the soliton template; taken from the classifier when absent.
    #[arg(long)]
    lambda: Option<f64>,
    /// Also write the unit-mass rescaling of the input here.
    #[arg(long, value_name = "NLSF")]
    rescale_out: Option<PathBuf>,
    #[command(flatten)]
    q: QArgs,
}

#[derive(Args)]
struct PipelineArgs {
    /// Run config (`key = value` lines).
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Artifact directory: diagnostics.csv, final.nlsf, snapshots/, verdict.txt.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// NLSQ profile overriding the config's ground-state source.
    #[arg(long, value_name = "NLSQ")]
    q: Option<PathBuf>,
}

fn groundstate(a: &GroundstateArgs) -> Result<i32, Error> {
    let cfg = ShootingConfig { r_max: a.rmax, n: a.n, tol: a.tol, cert_tol: a.cert_tol, ..Default::default() };
    let q = cfg.solve()?;
    let (g, l, e) = q.pohozhaev_residuals();
    println!(
        "q0={} iterations={} mass_sq={} grad_sq={} l4_4={} res_grad={:.3e} res_l4={:.3e} res_energy={:.3e}",
        fmt17(q.shoot_value()),
        q.iterations(),
        fmt17(q.mass_sq()),
        fmt17(q.grad_sq()),
        fmt17(q.l4_4()),
        g,
        l,
        e
    );
    if let Some(p) = &a.out {
        write_nlsq(p, &q)?;
    }
    Ok(0)
}

fn classify_cmd(a: &ClassifyArgs) -> Result<i32, Error> {
    let q0 = a.q.load()?;
    let f = match (&a.input, &a.config) {
        (Some(p), _) => read_nlsf(p)?,
        (None, Some(c)) => RunConfig::from_file(c)?.initial_field(&q0)?,
        (None, None) => unreachable!("clap requires one of --input, --config"),
    };
    let q = match a.q.reference {
        Reference::Grid => q0.on_grid(f.grid())?,
        Reference::Continuum => q0,
    };
    let c = classify(&f, &q, !a.no_galilean)?;
    println!("{}", c.record());
    if let Some(d) = &c.diagnostic {
        eprintln!("note: {d}");
    }
    Ok(0)
}

fn evolve_cmd(a: &EvolveArgs) -> Result<i32, Error> {
    let cfg = RunConfig::from_file(&a.config)?;
    let q0 = a.q.load()?;
    let f0 = cfg.initial_field(&q0)?;
    let q = match a.q.reference {
        Reference::Grid => q0.on_grid(f0.grid())?,
        Reference::Continuum => q0,
    };
    if let Some(d) = &a.out_snap {
        fs::create_dir_all(d)?;
    }
    let mut index = 0usize;
    let run = evolve_with(&f0, &cfg.evolve, &q, |f| {
        if let Some(d) = &a.out_snap {
            write_nlsf(d.join(format!("snap_{index:06}.nlsf")), f)?;
        }
        index += 1;
        Ok(())
    })?;
    if let Some(p) = &a.out_diag {
        write_series_csv(fs::File::create(p)?, &run.diagnostics)?;
    }
    if let Some(p) = &a.out_final {
        write_nlsf(p, &run.final_field)?;
    }
    let t_obs = run.t_blowup_observed.map_or_else(|| "none".to_string(), fmt17);
    let mut line = format!(
        "outcome={} t_final={} t_obs={} steps={} max_grad={} snapshots={index}",
        run.outcome,
        fmt17(run.t_final),
        t_obs,
        run.steps,
        fmt17(run.max_grad)
    );
    if run.outcome == Outcome::ReachedTEnd {
        if let Ok(c) = conservation_audit(&run.diagnostics, run.outcome) {
            line.push_str(&format!(
                " mass_drift={:.3e} energy_drift={:.3e} momentum_drift={:.3e}",
                c.mass_rel_drift, c.energy_rel_drift, c.momentum_abs_drift
            ));
        }
    }
    println!("{line}");
    Ok(0)
}

fn virial_cmd(a: &VirialArgs) -> Result<i32, Error> {
    let f = read_nlsf(&a.input)?;
    let q = a.q.load_for(&f)?;
    let n = norms(&f)?;
    let mut line = format!("t={} energy={} virial_rhs={}", fmt17(f.time()), fmt17(n.energy()), fmt17(n.virial_rhs()));
    match variance_and_rate(&f) {
        Ok((v, r)) => line.push_str(&format!(" variance={} rprime={}", fmt17(v), fmt17(r))),
        Err(e) => line.push_str(&format!(" variance=NaN rprime=NaN variance_note=\"{e}\"")),
    }
    if let Some(radius) = a.radius {
        let lv = z_r_and_second_derivative(&f, &Cutoff::new(radius)?)?;
        let ext = nlslab::virial::eta_geq_r(&f, &q, radius)?;
        line.push_str(&format!(
            " R={} z_R={} z_R_prime={} z_R_second={} A_R={} A_R_bound={} eta_geq_R={}",
            radius,
            fmt17(lv.z),
            fmt17(lv.z_prime),
            fmt17(lv.z_second),
            fmt17(lv.a_r),
            fmt17(lv.a_r_bound),
            fmt17(ext)
        ));
    }
    println!("{line}");
    Ok(0)
}

fn bound_cmd(a: &BoundArgs) -> Result<i32, Error> {
    let f = read_nlsf(&a.input)?;
    let q = a.q.load_for(&f)?;
    let f = if a.no_galilean { f } else { galilean_reduce(&f)?.0 };
    let settings = BoundSettings {
        mode: a.mode.into(),
        radius: a.radius,
        gamma: a.gamma,
        localized: LocalizedConstants { gamma0: a.gamma0, c_r: a.c_r },
        c2: a.c2,
    };
    let b = blowup_bound(&f, &q, &settings)?;
    println!("{}", b.record());
    Ok(0)
}

fn modulate_cmd(a: &ModulateArgs) -> Result<i32, Error> {
    let f = read_nlsf(&a.input)?;
    let q = a.q.load_for(&f)?;
    let lambda = match a.lambda {
        Some(l) => l,
        None => {
            let c = classify(&f, &q, true)?;
            match c.lambda_minus.filter(|lm| c.eta0 <= 1.0 && *lm > 0.0) {
                Some(lm) => lm,
                None => c.lambda.ok_or_else(|| Error::NotApplicable("classifier returned no lambda".into()))?,
            }
        }
    };
    let fit = fit_modulation(&f, &q, lambda)?;
    println!("{}", fit.record());
    if let Some(p) = &a.rescale_out {
        write_nlsf(p, &rescale_to_unit_mass(&f, &q)?)?;
    }
    Ok(0)
}

fn pipeline_cmd(a: &PipelineArgs) -> Result<i32, Error> {
    let cfg = RunConfig::from_file(&a.config)?;
    let q = match &a.q {
        Some(p) => read_nlsq(p)?,
        None => cfg.ground_state.load()?,
    };
    let v = run_pipeline_with(&cfg, &q, a.out.as_deref().map(Path::new))?;
    print!("{}", v.record());
    Ok(v.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("nlslab: cannot set up {t} threads: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match &cli.command {
        Command::Groundstate(a) => groundstate(a),
        Command::Classify(a) => classify_cmd(a),
        Command::Evolve(a) => evolve_cmd(a),
        Command::Virial(a) => virial_cmd(a),
        Command::Bound(a) => bound_cmd(a),
        Command::Modulate(a) => modulate_cmd(a),
        Command::Pipeline(a) => pipeline_cmd(a),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("nlslab: {e}");
            ExitCode::from(1)
        }
    }
}
