//! End-to-end runs of the `cavsqueeze` binary.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;

use cavsqueeze::commands::{EffectiveReport, InoutReport, SimulateReport, ValidateReport};
use cavsqueeze::output::{to_json, Ext, Infinite, RunManifest};
use cavsqueeze::sweep::{Scalar, SweepReport};

const WORKED: &str = r#"
[parameters]
g_a = "g"
g_b = "g"
rabi_1 = "100*g"
rabi_2 = "10*g"
detuning_1 = "1e4*g"
detuning_2 = "2e4*g"
two_photon_1 = "-3*g/400"
two_photon_2 = "-g/80"
kappa_a = "g/5"
kappa_b = "g/5"
tau = "20/g"

[sites]
distribution = "uniform"
count = 40000
"#;

/// Input-output block appended to `WORKED` with the cavity decay overridden.
fn inout_config(omega: &str, kappa: &str) -> String {
    format!("{WORKED}\n[drive]\nomega = \"{omega}\"\nkappa_a = \"{kappa}\"\nkappa_b = \"{kappa}\"\neps_a = [0.3, -0.1]\nspectrum = {{ min = \"-g\", max = \"g\", points = 5 }}\n")
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
    out: PathBuf,
}

impl Run {
    fn file(&self, name: &str) -> String {
        std::fs::read_to_string(self.out.join(name)).unwrap_or_else(|e| panic!("{name}: {e}\nstderr: {}", self.stderr))
    }

    fn json<T: serde::de::DeserializeOwned>(&self, name: &str) -> T {
        serde_json::from_str(&self.file(name)).unwrap()
    }
}

fn run_in(dir: &Path, tag: &str, config: &str, args: &[&str]) -> Run {
    let cfg = dir.join(format!("{tag}.toml"));
    std::fs::write(&cfg, config).unwrap();
    let out = dir.join(format!("{tag}-out"));
    let o = Command::new(env!("CARGO_BIN_EXE_cavsqueeze"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .env_remove("CAVSQUEEZE_OUT")
        .output()
        .unwrap();
    Run {
        code: o.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&o.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&o.stderr).into_owned(),
        out,
    }
}

fn run(config: &str, args: &[&str]) -> (tempfile::TempDir, Run) {
    let dir = tempfile::tempdir().unwrap();
    let r = run_in(dir.path(), "run", config, args);
    (dir, r)
}

fn dir_contents(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect()
}

#[test]
fn worked_example_passes_validation() {
    let (_d, r) = run(WORKED, &["validate"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rep: ValidateReport = r.json("validate.json");
    assert!(rep.ok);
    assert!(rep.condition.relative < 1e-3);
    assert!(rep.regime.iter().all(|c| c.ok));
    let man: RunManifest = r.json("manifest.json");
    assert_eq!(man.timestamp, 1_700_000_000);
    assert_eq!(man.tasks[0].status, "ok");
    let names: Vec<&str> = man.files.iter().map(|f| f.name.as_str()).collect();
    assert_eq!(names, ["validate.csv", "validate.json"]);
}

#[test]
fn dispersive_gate_failure_exits_2() {
    let cfg = WORKED.replace("g_a = \"g\"", "g_a = \"1e4*g\"");
    let (_d, r) = run(&cfg, &["validate"]);
    assert_eq!(r.code, 2, "{}", r.stderr);
    assert!(r.stderr.contains("Delta_1"), "{}", r.stderr);
    let man: RunManifest = r.json("manifest.json");
    assert_eq!(man.tasks[0].status, "gate-failed");

    let warn = format!("{cfg}\n[gates]\nwarn_only = true\n");
    let (_d, r) = run(&warn, &["validate"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (_d, r) = run(&warn, &["validate", "--strict"]);
    assert_eq!(r.code, 2);
}

#[test]
fn schema_errors_exit_4_and_name_the_field() {
    let (_d, r) = run(&WORKED.replace("kappa_a = \"g/5\"\n", ""), &["validate"]);
    assert_eq!(r.code, 4);
    assert!(r.stderr.contains("kappa_a"), "{}", r.stderr);

    let (_d, r) = run(&format!("{WORKED}\n[output]\nformat = [\"csv\"]\n"), &["validate"]);
    assert_eq!(r.code, 4);
    assert!(r.stderr.contains("format"), "{}", r.stderr);

    let (_d, r) = run(&WORKED.replace("\"g/5\"", "\"g/\""), &["validate"]);
    assert_eq!(r.code, 4);

    let random = WORKED.replace("distribution = \"uniform\"", "distribution = \"random\"");
    let (_d, r) = run(&random, &["validate"]);
    assert_eq!(r.code, 4);
    assert!(r.stderr.contains("seed"), "{}", r.stderr);

    let o = Command::new(env!("CARGO_BIN_EXE_cavsqueeze")).arg("frobnicate").output().unwrap();
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn effective_reports_omega_and_scales_with_n() {
    let (_d, r) = run(WORKED, &["effective"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rep: EffectiveReport = r.json("effective.json");
    // The printed inputs give Ω = −g/5 · 400/399 at N = 4·10⁴.
    assert!((rep.omega.re - (-0.2 * 400.0 / 399.0)).abs() < 1e-12, "{:?}", rep.omega);
    assert!(rep.omega.im.abs() < 1e-15);
    assert!((rep.delta_tilde + 0.01).abs() < 1e-14);
    assert!((rep.delta_k.min + 0.9975).abs() < 1e-14 && rep.delta_k.max == rep.delta_k.min);
    let xi = rep.xi.last().unwrap();
    assert_eq!(xi.tau, 20.0);

    let (_d, r2) = run(&WORKED.replace("count = 40000", "count = 80000"), &["effective"]);
    let rep2: EffectiveReport = r2.json("effective.json");
    let xi2 = rep2.xi.last().unwrap();
    assert!((xi2.xi.im - 2.0 * xi.xi.im).abs() < 1e-12 * xi.abs);
    assert!((xi2.xi.re - 2.0 * xi.xi.re).abs() < 1e-12 * xi.abs);
}

#[test]
fn xi_is_linear_in_tau() {
    let cfg = format!("{WORKED}\n[effective]\ntau = {{ min = 0, max = \"30/g\", points = 7 }}\n");
    let (_d, r) = run(&cfg, &["effective"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rep: EffectiveReport = r.json("effective.json");
    assert_eq!(rep.xi.len(), 7);
    assert_eq!(rep.xi[0].abs, 0.0);
    let slope = rep.xi[6].abs / rep.xi[6].tau;
    for row in &rep.xi {
        assert!((row.abs - slope * row.tau).abs() <= 1e-13 * rep.xi[6].abs, "{row:?}");
    }
    // CSV mirrors the JSON to full precision.
    let csv = r.file("effective.csv");
    let last = csv.lines().last().unwrap();
    let cells: Vec<f64> = last.split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(cells[0], rep.xi[6].tau);
    assert_eq!(cells[3], rep.xi[6].abs);
}

const SMALL: &str = r#"
[parameters]
rabi_1 = "14*g"
rabi_2 = "14*g"
detuning_1 = "147*g"
detuning_2 = "294*g"
two_photon_1 = 0.32656654735418117
two_photon_2 = -0.33565703703555766
kappa_a = 0
kappa_b = 0
tau = "20/g"

[sites]
distribution = "uniform"
count = 1

[simulation]
level = "I"
n_max = 5
tau = [0, 10, 20]
"#;

#[test]
fn simulate_starts_exact_and_squeezes() {
    let (_d, r) = run(SMALL, &["simulate"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rep: SimulateReport = r.json("simulate.json");
    let SimulateReport::Grid { rows, .. } = rep else { panic!("expected grid mode") };
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0].tau, 0.0);
    assert!(rows[0].infidelity < 1e-14);
    assert!((rows[0].var_min - 0.25).abs() < 1e-12);
    assert!(rows[1].var_min < rows[0].var_min && rows[2].var_min < rows[1].var_min);
    let csv = r.file("simulate.csv");
    assert!(csv.starts_with("tau,xi_abs,infidelity,leakage,excited_population,var_x,var_y,var_min,n_a,n_b\n"));
}

#[test]
fn simulate_ladder_is_monotone() {
    let cfg = r#"
[parameters]
rabi_1 = "100*g"
rabi_2 = "10*g"
detuning_1 = "1e4*g"
detuning_2 = "2e4*g"
two_photon_1 = "-3*g/400"
two_photon_2 = "-g/80"
kappa_a = 0
kappa_b = 0

[sites]
distribution = "uniform"
count = 1

[simulation]
n_max = 6

[simulation.ladder]
margins = [10, 30, 100]
n_atoms = 1
xi_target = 0.1
"#;
    let (_d, r) = run(cfg, &["simulate"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rep: SimulateReport = r.json("simulate.json");
    let SimulateReport::Ladder { rows, .. } = rep else { panic!("expected ladder mode") };
    assert!(rows.windows(2).all(|w| w[1].infidelity < w[0].infidelity), "{rows:?}");
}

#[test]
fn critical_point_reports_markers_and_banner() {
    let (_d, r) = run(&inout_config("g/2", "g/2"), &["inout"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stderr.contains("perfect squeezing point"), "{}", r.stderr);
    let rep: InoutReport = r.json("inout.json");
    assert!(rep.critical);
    assert_eq!(rep.var_y_out, 0.0);
    assert_eq!(rep.r, Ext::Marker(Infinite::Infinite));
    assert_eq!(rep.var_x_out, Ext::Marker(Infinite::Infinite));
    assert!(rep.alpha_0.is_none() && rep.ideal_squeezed.is_none());
    let raw: serde_json::Value = serde_json::from_str(&r.file("inout.json")).unwrap();
    assert_eq!(raw["r"], "infinite");
    let csv = r.file("inout.csv");
    assert!(csv.lines().any(|l| l.starts_with("0.0000000000000000e0,inf,0.0000000000000000e0")), "{csv}");
}

#[test]
fn uncoupled_cavity_has_flat_vacuum_spectrum() {
    let (_d, r) = run(&inout_config("0", "g"), &["inout"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rep: InoutReport = r.json("inout.json");
    assert_eq!(rep.spectrum.len(), 5);
    for row in &rep.spectrum {
        assert!((row.var_x.finite().unwrap() - 0.25).abs() < 1e-15 && (row.var_y - 0.25).abs() < 1e-15, "{row:?}");
    }
    assert_eq!(rep.r, Ext::Finite(0.0));
}

#[test]
fn third_of_threshold_gives_two_ln_two() {
    let (_d, r) = run(&inout_config("g/3", "g"), &["inout"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rep: InoutReport = r.json("inout.json");
    assert!((rep.r.finite().unwrap() - 2.0 * 2f64.ln()).abs() < 1e-12);
    assert!((rep.var_y_out - 1.0 / 16.0).abs() < 1e-15);
    assert!((rep.var_x_out.finite().unwrap() - 1.0).abs() < 1e-14);
    let s = rep.ideal_squeezed.unwrap();
    assert!((s.xi.re + 2f64.ln()).abs() < 1e-12);
}

#[test]
fn above_threshold_warns() {
    let (_d, r) = run(&inout_config("effective", "g/5"), &["inout"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stderr.contains("above threshold"), "{}", r.stderr);
}

fn sweep_config(values: &str) -> String {
    format!("{}\n[sweep]\ncommand = \"inout\"\n\n[[sweep.axis]]\npath = \"drive.omega\"\nvalues = {values}\n", inout_config("0", "g"))
}

#[test]
fn sweep_matches_closed_form_reduction() {
    let (_d, r) = run(&sweep_config("[0, 0.2, 0.4, 0.6, 0.8, 0.99]"), &["sweep", "--threads", "3"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rep: SweepReport = r.json("sweep.json");
    assert_eq!(rep.points.len(), 6);
    assert_eq!(rep.failed, 0);
    for p in &rep.points {
        let Scalar::Float(omega) = p.axes[0].value else { panic!("{p:?}") };
        let want = -2.0 * ((omega - 1.0) / (omega + 1.0)).abs().ln();
        let got = p.metrics.iter().find(|m| m.name == "r").unwrap();
        let Scalar::Float(got) = got.value else { panic!("{got:?}") };
        assert!((got - want).abs() <= 1e-12 * want.max(1.0), "omega {omega}: {got} vs {want}");
    }
    let csv = r.file("sweep.csv");
    assert!(csv.starts_with("point,drive.omega,status,row,metric,value\n"));
}

#[test]
fn one_point_sweep_equals_direct_run() {
    let dir = tempfile::tempdir().unwrap();
    let sweep = run_in(dir.path(), "s", &sweep_config("[\"g/3\"]"), &["sweep"]);
    let direct = run_in(dir.path(), "d", &inout_config("g/3", "g"), &["inout"]);
    assert_eq!((sweep.code, direct.code), (0, 0));
    let rep: SweepReport = sweep.json("sweep.json");
    let d: InoutReport = direct.json("inout.json");
    let metric = |name: &str| rep.points[0].metrics.iter().find(|m| m.name == name).unwrap().value.clone();
    assert_eq!(metric("var_y_out"), Scalar::Float(d.var_y_out));
    assert_eq!(metric("r"), Scalar::Float(d.r.finite().unwrap()));
    // The spectrum rows of the sweep CSV carry the direct CSV cells verbatim.
    let direct_csv = direct.file("inout.csv");
    let sweep_csv = sweep.file("sweep.csv");
    let first = direct_csv.lines().nth(1).unwrap().split(',').collect::<Vec<_>>();
    for (col, cell) in ["omega", "var_x", "var_y"].iter().zip(first) {
        assert!(sweep_csv.lines().any(|l| l.ends_with(&format!(",ok,0,{col},{cell}"))), "{col}={cell}");
    }
}

#[test]
fn sweep_isolates_failed_points_and_enforces_cap() {
    let (_d, r) = run(&sweep_config("[0.5, -1, 0.7]"), &["sweep"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rep: SweepReport = r.json("sweep.json");
    assert_eq!(rep.failed, 1);
    assert!(rep.points[1].status.starts_with("failed"));
    assert_eq!(rep.points[2].status, "ok");
    assert!(r.stdout.contains("1 failed"));

    let capped = sweep_config("[0.1, 0.2, 0.3]").replace("command = \"inout\"", "command = \"inout\"\nmax_points = 2");
    let (_d, r) = run(&capped, &["sweep"]);
    assert_eq!(r.code, 4, "{}", r.stderr);
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfgs = [
        ("effective", WORKED.to_string(), vec!["effective"]),
        ("simulate", SMALL.to_string(), vec!["simulate"]),
        ("inout", inout_config("g/3", "g"), vec!["inout"]),
        ("sweep", sweep_config("[0, 0.3, 0.6, 0.9]"), vec!["sweep", "--threads", "4"]),
    ];
    for (tag, cfg, args) in cfgs {
        let a = run_in(dir.path(), &format!("{tag}-a"), &cfg, &args);
        let b = run_in(dir.path(), &format!("{tag}-b"), &cfg, &args);
        assert_eq!((a.code, b.code), (0, 0), "{tag}: {}", a.stderr);
        assert_eq!(dir_contents(&a.out), dir_contents(&b.out), "{tag}");
    }
}

#[test]
fn reports_round_trip_through_json() {
    let dir = tempfile::tempdir().unwrap();
    let v = run_in(dir.path(), "v", WORKED, &["validate"]);
    let e = run_in(dir.path(), "e", WORKED, &["effective"]);
    let s = run_in(dir.path(), "s", SMALL, &["simulate"]);
    let i = run_in(dir.path(), "i", &inout_config("g/2", "g/2"), &["inout"]);
    let w = run_in(dir.path(), "w", &sweep_config("[0, 1]"), &["sweep"]);
    fn same<T: serde::de::DeserializeOwned + serde::Serialize>(r: &Run, name: &str) {
        let text = r.file(name);
        let parsed: T = serde_json::from_str(&text).unwrap();
        assert_eq!(to_json(&parsed).unwrap(), text, "{name}");
    }
    same::<ValidateReport>(&v, "validate.json");
    same::<EffectiveReport>(&e, "effective.json");
    same::<SimulateReport>(&s, "simulate.json");
    same::<InoutReport>(&i, "inout.json");
    same::<SweepReport>(&w, "sweep.json");
    for r in [&v, &e, &s, &i, &w] {
        same::<RunManifest>(r, "manifest.json");
    }
}

#[test]
fn manifest_inventory_matches_files() {
    let (_d, r) = run(WORKED, &["effective", "--seed", "17"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let man: RunManifest = r.json("manifest.json");
    assert_eq!(man.seed, Some(17));
    assert!(man.effective.as_ref().unwrap().regime_ok);
    for f in &man.files {
        let bytes = std::fs::read(r.out.join(&f.name)).unwrap();
        assert_eq!(bytes.len() as u64, f.bytes);
        assert_eq!(cavsqueeze::output::sha256_hex(&bytes), f.sha256);
    }
    assert!(!r.out.join("manifest.json.tmp").exists());
}

#[test]
fn output_directory_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, WORKED).unwrap();
    let target = dir.path().join("from-env");
    let o = Command::new(env!("CARGO_BIN_EXE_cavsqueeze"))
        .args(["validate", "--config"])
        .arg(&cfg)
        .env("CAVSQUEEZE_OUT", &target)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(target.join("manifest.json").exists());
}
