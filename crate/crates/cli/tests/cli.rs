use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use kpp_fronts::InitialProfile;
use kpp_fronts_cli::config::{DiffusionKindSpec, GeometrySpec, ReactionKindSpec, TermSpec};
use kpp_fronts_cli::{CliError, RunConfig};
use tempfile::TempDir;

fn bin(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kpp-fronts"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const SMALL_LINE: &str = "
[sim]
x_min = -10.0
x_max = 40.0
n = 501

[sim.front]
t_end = 40.0
snapshot_interval = 10.0
";

#[test]
fn defaults_round_trip_through_toml() {
    let cfg = RunConfig::default();
    let back = RunConfig::from_toml(&cfg.to_toml()).unwrap();
    assert_eq!(back, cfg);
    assert_eq!(back.diffusion_law().unwrap(), cfg.diffusion_law().unwrap());
    assert_eq!(back.grid().unwrap(), cfg.grid().unwrap());
}

#[test]
fn populated_config_round_trips() {
    let mut cfg = RunConfig::default();
    cfg.diffusion.kind = DiffusionKindSpec::Sum;
    cfg.diffusion.terms = vec![TermSpec { weight: 1.0, p: 2.0 }, TermSpec { weight: 0.5, p: 3.0 }];
    cfg.diffusion.alpha = Some(1e-3);
    cfg.reaction.kind = ReactionKindSpec::Tabulated;
    cfg.reaction.s = vec![-1.0, 0.0, 1.0];
    cfg.reaction.f = vec![0.0, 0.5, 0.0];
    cfg.sim.geometry = GeometrySpec::Radial;
    cfg.sim.dim = 3;
    cfg.sim.x_max = Some(50.0);
    cfg.sim.initial = Some(InitialProfile::Plateau {
        radius: 5.0,
        width: 0.5,
    });
    cfg.sim.front.snapshot_interval = Some(2.0);
    cfg.solver.integrator.rtol = 1e-9;
    cfg.output.deterministic = false;
    let back = RunConfig::from_toml(&cfg.to_toml()).unwrap();
    assert_eq!(back, cfg);
}

#[test]
fn unknown_keys_are_rejected_at_any_depth() {
    for text in [
        "[diffusoin]\np = 2.0\n",
        "[solver.integrator]\nrtoll = 1e-9\n",
        "[sim]\ninitial = { kind = \"tanh\", center = 0.0, widht = 1.0 }\n",
    ] {
        let err = RunConfig::from_toml(text).unwrap_err();
        assert!(matches!(err, CliError::Usage(_)), "{text}");
    }
}

#[test]
fn validate_exit_codes() {
    let dir = TempDir::new().unwrap();
    let ok = bin(dir.path(), &["validate"]);
    assert_eq!(ok.status.code(), Some(0));

    // double well with μ = 0.25 sampled into a table: F(1) = −8μ/3 < 0
    let s: Vec<f64> = (0..=40).map(|i| -1.0 + i as f64 / 20.0).collect();
    let f: Vec<f64> = s.iter().map(|x| 2.0 * (x - 0.25) * (1.0 - x * x)).collect();
    write(
        dir.path(),
        "tab.toml",
        &format!("[reaction]\nkind = \"tabulated\"\ns = {s:?}\nf = {f:?}\n"),
    );
    let bad = bin(dir.path(), &["validate", "--config", "tab.toml"]);
    assert_eq!(bad.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&bad.stderr);
    assert!(stderr.contains("F(1) = -0.666667 ≤ 0"), "{stderr}");

    write(dir.path(), "typo.toml", "[diffusoin]\np = 2.0\n");
    let typo = bin(dir.path(), &["validate", "--config", "typo.toml"]);
    assert_eq!(typo.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&typo.stderr).contains("diffusoin"));

    assert_eq!(
        bin(dir.path(), &["validate", "--config", "missing.toml"]).status.code(),
        Some(2)
    );
}

#[test]
fn table_file_is_read_next_to_the_config() {
    let dir = TempDir::new().unwrap();
    let mut csv = String::from("s,f\n");
    for i in 0..=40 {
        let x = -1.0 + i as f64 / 20.0;
        csv += &format!("{x},{}\n", 2.0 * (x + 0.25) * (1.0 - x * x));
    }
    fs::create_dir(dir.path().join("cfg")).unwrap();
    write(&dir.path().join("cfg"), "f.csv", &csv);
    write(
        &dir.path().join("cfg"),
        "run.toml",
        "[reaction]\nkind = \"tabulated\"\nfile = \"f.csv\"\n",
    );
    let out = bin(dir.path(), &["wave", "--config", "cfg/run.toml", "--out", "w"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let c: f64 = fs::read_to_string(dir.path().join("w/speed.txt"))
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    // interpolation error of the table only
    assert!((c - 0.5).abs() < 1e-2, "{c}");
}

#[test]
fn wave_quadratic_closed_form() {
    let dir = TempDir::new().unwrap();
    let out = bin(dir.path(), &["wave", "--out", "w", "--svg"]);
    assert_eq!(out.status.code(), Some(0));
    let speed = fs::read_to_string(dir.path().join("w/speed.txt")).unwrap();
    assert!(speed.starts_with("0.500000"), "{speed}");
    for f in ["z.csv", "profile.csv", "report.json", "profile.svg", "z.svg"] {
        assert!(dir.path().join("w").join(f).exists(), "{f}");
    }
    let z = fs::read_to_string(dir.path().join("w/z.csv")).unwrap();
    assert!(z.starts_with("r,z\n"));
    let profile = fs::read_to_string(dir.path().join("w/profile.csv")).unwrap();
    assert!(profile.starts_with("x,q,qx\n"));
    assert_eq!(profile.lines().count(), 4002);
}

#[test]
fn wave_stationary_and_fast_diffusion() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "still.toml", "[reaction]\nmu = 0.0\n");
    assert_eq!(
        bin(dir.path(), &["wave", "--config", "still.toml", "--out", "a"])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        fs::read_to_string(dir.path().join("a/speed.txt")).unwrap(),
        "0.0000000000\n"
    );
    assert_eq!(json(&dir.path().join("a/report.json"))["stationary"], true);

    write(dir.path(), "fast.toml", "[diffusion]\np = 1.5\n");
    assert_eq!(
        bin(dir.path(), &["wave", "--config", "fast.toml", "--out", "b"])
            .status
            .code(),
        Some(0)
    );
    let report = json(&dir.path().join("b/report.json"));
    assert!(report["speed_identity_residual"].as_f64().unwrap() < 1e-5);
    assert!(report["profile_residuals"]["speed_identity"].as_f64().unwrap() < 1e-3);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "small.toml", SMALL_LINE);
    for run in ["a", "b"] {
        assert_eq!(bin(dir.path(), &["wave", "--out", run]).status.code(), Some(0));
        let sim = format!("{run}/sim");
        assert_eq!(
            bin(dir.path(), &["simulate", "--config", "small.toml", "--out", &sim])
                .status
                .code(),
            Some(0)
        );
    }
    for f in [
        "z.csv",
        "profile.csv",
        "report.json",
        "speed.txt",
        "sim/front.csv",
        "sim/snapshots.csv",
        "sim/report.json",
    ] {
        let a = fs::read(dir.path().join("a").join(f)).unwrap();
        let b = fs::read(dir.path().join("b").join(f)).unwrap();
        assert!(a == b, "{f} differs");
    }
}

#[test]
fn simulate_matches_shooting_and_radial_is_slower() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "line.toml", SMALL_LINE);
    let out = bin(
        dir.path(),
        &["simulate", "--config", "line.toml", "--out", "line", "--svg"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let line = json(&dir.path().join("line/report.json"));
    let v = line["fitted_speed"].as_f64().unwrap();
    assert!((v - 0.5).abs() / 0.5 <= 0.02, "{v}");
    assert_eq!(line["c_star"].as_f64().unwrap(), 0.5);
    let snaps = fs::read_to_string(dir.path().join("line/snapshots.csv")).unwrap();
    // five snapshots of 501 nodes plus the header
    assert_eq!(snaps.lines().count(), 5 * 501 + 1);
    assert!(dir.path().join("line/front.svg").exists());

    write(
        dir.path(),
        "radial.toml",
        "[sim]\ngeometry = \"radial\"\nx_max = 60.0\nn = 601\ninitial = { kind = \"plateau\", radius = 10.0, width = 1.0 }\n\n[sim.front]\nt_end = 40.0\n",
    );
    let out = bin(dir.path(), &["simulate", "--config", "radial.toml", "--out", "radial"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&dir.path().join("radial/report.json"))["fitted_speed"]
        .as_f64()
        .unwrap();
    assert!(r < v && r > 0.3, "{r} vs {v}");
}

#[test]
fn zero_end_time_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "t0.toml", "[sim.front]\nt_end = 0.0\n");
    let out = bin(dir.path(), &["simulate", "--config", "t0.toml", "--out", "s"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("s").exists());
}

#[test]
fn sweep_and_regularization_study() {
    let dir = TempDir::new().unwrap();
    write(
        dir.path(),
        "small.toml",
        &format!("{SMALL_LINE}\n[sweep]\nepsilons = [1.0, 0.5]\n"),
    );
    let out = bin(
        dir.path(),
        &["sweep", "--config", "small.toml", "--out", "sw", "--workers", "2"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let table = fs::read_to_string(dir.path().join("sw/sweep.csv")).unwrap();
    assert!(table.starts_with("epsilon,fitted_speed,interface_width\n"));
    assert_eq!(table.lines().count(), 3);

    write(dir.path(), "p3.toml", "[diffusion]\np = 3.0\n");
    let out = bin(
        dir.path(),
        &["regularization-study", "--config", "p3.toml", "--out", "reg"],
    );
    assert_eq!(out.status.code(), Some(0));
    let report = json(&dir.path().join("reg/report.json"));
    assert_eq!(report["gaps_strictly_decreasing"], true);
    let rows = report["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows[2]["gap"].as_f64().unwrap() <= 1e-4);

    write(dir.path(), "reg.toml", "[diffusion]\np = 3.0\nalpha = 0.01\n");
    let out = bin(
        dir.path(),
        &["regularization-study", "--config", "reg.toml", "--out", "x"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(bin(dir.path(), &["wave", "--workers", "0"]).status.code(), Some(2));
}

#[test]
fn invalid_reaction_fails_wave_with_status_one() {
    let dir = TempDir::new().unwrap();
    let s: Vec<f64> = (0..=40).map(|i| -1.0 + i as f64 / 20.0).collect();
    let f: Vec<f64> = s.iter().map(|x| 2.0 * (x - 0.25) * (1.0 - x * x)).collect();
    write(
        dir.path(),
        "tab.toml",
        &format!("[reaction]\nkind = \"tabulated\"\ns = {s:?}\nf = {f:?}\n"),
    );
    assert_eq!(
        bin(dir.path(), &["wave", "--config", "tab.toml", "--out", "w"])
            .status
            .code(),
        Some(1)
    );
    assert!(!dir.path().join("w/speed.txt").exists());
}
