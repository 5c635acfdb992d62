use std::path::Path;
use std::process::{Command, Output};

use nlslab::io::{read_nlsf, read_nlsq, read_series_csv};

const SUBCOMMANDS: [&str; 7] = ["groundstate", "classify", "evolve", "virial", "bound", "modulate", "pipeline"];

fn nlslab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlslab")).current_dir(dir).args(args).output().expect("spawn nlslab")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "failed: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn field(line: &str, key: &str) -> f64 {
    let prefix = format!("{key}=");
    let v = line.split_whitespace().find_map(|w| w.strip_prefix(&prefix)).unwrap_or_else(|| panic!("{key} in {line}"));
    v.parse().unwrap()
}

/// Solves Q and evolves `a Q` on the radial grid, keeping the first snapshot.
fn setup(a: f64) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    stdout(&nlslab(dir.path(), &["groundstate", "--out", "q.nlsq"]));
    std::fs::write(
        dir.path().join("run.cfg"),
        format!("kind = radial1d\nn = 4096\nt_end = 0.02\nsnapshot_every = 10\ninit = soliton a={a}\n"),
    )
    .unwrap();
    stdout(&nlslab(
        dir.path(),
        &["evolve", "--config", "run.cfg", "--q", "q.nlsq", "--out-diag", "d.csv", "--out-snap", "snaps", "--out-final", "f.nlsf"],
    ));
    dir
}

#[test]
fn help_documents_every_flag() {
    let tmp = std::env::temp_dir();
    for sub in SUBCOMMANDS {
        let text = stdout(&nlslab(&tmp, &[sub, "-h"]));
        let mut flags = 0;
        for line in text.lines().map(str::trim_start).filter(|l| l.starts_with("--") || l.starts_with("-h")) {
            flags += 1;
            let described = line.split("  ").map(str::trim).filter(|s| !s.is_empty()).count() >= 2;
            assert!(described, "{sub}: undocumented flag line {line:?}");
        }
        assert!(flags >= 2, "{sub}: {text}");
    }
    let top = stdout(&nlslab(&tmp, &["--help"]));
    assert!(top.contains("NLSLAB_THREADS"));
    for sub in SUBCOMMANDS {
        assert!(top.contains(sub));
    }
}

#[test]
fn groundstate_writes_a_certified_profile() {
    let dir = tempfile::tempdir().unwrap();
    let out = stdout(&nlslab(dir.path(), &["groundstate", "--rmax", "20", "--n", "4096", "--out", "q.nlsq"]));
    assert!(field(&out, "res_grad").abs() < 1e-6);
    let q = read_nlsq(dir.path().join("q.nlsq")).unwrap();
    assert_eq!(q.n(), 4096);
    assert!((field(&out, "mass_sq") - q.mass_sq()).abs() < 1e-12 * q.mass_sq());
}

#[test]
fn rejects_r_max_below_fifteen() {
    let dir = tempfile::tempdir().unwrap();
    let o = nlslab(dir.path(), &["groundstate", "--rmax", "10"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("r_max"));
}

#[test]
fn evolve_writes_diagnostics_and_snapshots() {
    let dir = setup(0.9);
    let csv = std::fs::read_to_string(dir.path().join("d.csv")).unwrap();
    assert!(csv.starts_with("t,mass,energy,grad_sq,l4_4,eta,variance,rprime,z_R,eta_geq_R,A_R_bound\n"));
    let rows = read_series_csv(&csv).unwrap();
    assert!((rows.last().unwrap()[0] - 0.02).abs() < 1e-12);
    let first = read_nlsf(dir.path().join("snaps/snap_000000.nlsf")).unwrap();
    let last = read_nlsf(dir.path().join("f.nlsf")).unwrap();
    assert_eq!(first.time(), 0.0);
    assert!((last.time() - 0.02).abs() < 1e-12);
    assert!((first.mass() - last.mass()).abs() < 1e-10 * first.mass());
}

#[test]
fn classify_bound_virial_and_modulate_on_a_snapshot() {
    let dir = setup(1.2);
    let d = dir.path();
    let snap = "snaps/snap_000000.nlsf";

    let c = stdout(&nlslab(d, &["classify", "--input", snap, "--q", "q.nlsq"]));
    assert!(c.contains("case=above_threshold"), "{c}");
    assert!((field(&c, "eta0") - 1.44).abs() < 1e-10);
    assert!((field(&c, "lambda") - 1.44).abs() < 1e-3 * 1.44);

    let via_config = stdout(&nlslab(d, &["classify", "--config", "run.cfg", "--q", "q.nlsq"]));
    assert_eq!(c, via_config);

    let fv = stdout(&nlslab(d, &["bound", "--input", snap, "--q", "q.nlsq", "--mode", "finite-variance"]));
    let r0 = field(&fv, "r0");
    let beta = field(&fv, "beta");
    assert!((field(&fv, "t_b") - beta * beta * (2.0 * r0).sqrt()).abs() < 1e-9);
    assert!(fv.contains("mode=finite-variance") && fv.contains("rprime0=0.000000000000"));

    let rad = stdout(&nlslab(d, &["bound", "--input", snap, "--q", "q.nlsq", "--mode", "radial"]));
    assert!(rad.contains("mode=radial") && field(&rad, "t_b") > 0.0);

    let v = stdout(&nlslab(d, &["virial", "--input", snap, "--q", "q.nlsq", "--R", "3"]));
    assert!(field(&v, "A_R").abs() <= field(&v, "A_R_bound"));

    let m = stdout(&nlslab(d, &["modulate", "--input", snap, "--q", "q.nlsq", "--lambda", "1.44", "--rescale-out", "v.nlsf"]));
    assert!(field(&m, "resid_l2") < 1e-8, "{m}");
    assert!((field(&m, "beta") - 1.44).abs() < 1e-8);
    let v = read_nlsf(d.join("v.nlsf")).unwrap();
    let q = read_nlsq(d.join("q.nlsq")).unwrap().on_grid(v.grid()).unwrap();
    assert!((v.mass() / q.mass_sq() - 1.0).abs() < 1e-6);
}

#[test]
fn local_bound_requires_radius_and_gamma() {
    let dir = setup(1.2);
    let o = nlslab(dir.path(), &["bound", "--input", "f.nlsf", "--q", "q.nlsq", "--mode", "local"]);
    assert_eq!(o.status.code(), Some(2), "clap usage errors exit with 2");
    let o = nlslab(
        dir.path(),
        &["bound", "--input", "f.nlsf", "--q", "q.nlsq", "--mode", "local", "--R", "1", "--gamma", "0.05"],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("R"));
}

#[test]
fn pipeline_verdicts_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    stdout(&nlslab(d, &["groundstate", "--out", "q.nlsq"]));
    let cases = [
        ("1.2", "bound_respected"),
        ("0.9", "no_blowup_within_horizon"),
        ("1.0", "bound_not_applicable"),
    ];
    for (a, verdict) in cases {
        let cfg = format!("a{a}.cfg");
        std::fs::write(
            d.join(&cfg),
            format!(
                "kind = radial1d\nt_end = 0.6\ndiag_every = 50\ninit = soliton a={a}\nmodes = finite-variance, radial\nq_file = q.nlsq\n"
            ),
        )
        .unwrap();
        let out_dir = format!("out{a}");
        let o = nlslab(d, &["pipeline", "--config", &cfg, "--out", &out_dir]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let text = String::from_utf8(o.stdout).unwrap();
        assert!(text.starts_with(&format!("verdict: {verdict}\n")), "{text}");
        let saved = std::fs::read_to_string(d.join(&out_dir).join("verdict.txt")).unwrap();
        assert_eq!(saved, text);
        assert!(d.join(&out_dir).join("diagnostics.csv").exists());
        assert!(d.join(&out_dir).join("final.nlsf").exists());
    }
}

#[test]
fn config_errors_carry_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.cfg"), "kind = radial1d\ndt0 = fast\ninit = soliton a=1.2\n").unwrap();
    let o = nlslab(dir.path(), &["pipeline", "--config", "bad.cfg"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"), "{}", String::from_utf8_lossy(&o.stderr));
    let o = nlslab(dir.path(), &["evolve", "--config", "missing.cfg"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn thread_cap_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_nlslab"))
        .current_dir(dir.path())
        .env("NLSLAB_THREADS", "1")
        .args(["groundstate", "--n", "4096"])
        .output()
        .unwrap();
    assert!(o.status.success());
    let o = Command::new(env!("CARGO_BIN_EXE_nlslab"))
        .current_dir(dir.path())
        .env("NLSLAB_THREADS", "many")
        .args(["groundstate"])
        .output()
        .unwrap();
    assert!(!o.status.success());
}
