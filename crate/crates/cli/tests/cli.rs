use std::path::{Path, PathBuf};
use std::process::Command;

use refraction_cli::{run, CliError, CommandName, RunConfig};

fn shipped(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_refraction"))
}

const SMALL: &str = r#"
[model]
gamma_tilde = 1.0
sigma = 1.4142135623730951

[problem]
q = 2.0
delta = 0.5
beta = 0.1
cost = { kind = "quadratic", params = { alpha = 1.0 } }

[command]
name = "solve"
x_grid = [-1.0, 0.0, 1.0]

[command.mc]
n_paths = 200
dt = 0.01
seed = 5
"#;

fn write(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("run.toml");
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn empty_grid_is_a_config_fault() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), &SMALL.replace("[-1.0, 0.0, 1.0]", "[]"));
    let out = binary().arg("--config").arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("command.x_grid"));
}

#[test]
fn unknown_command_and_missing_file_are_config_faults() {
    let out = binary().args(["--config", "/nonexistent.toml"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), SMALL);
    let out = binary().arg("--config").arg(&cfg).args(["--command", "plot"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exit_codes() {
    assert_eq!(CliError::Config(String::new()).exit_code(), 2);
    assert_eq!(CliError::Numeric(refraction_core::Error::NoConvergence(String::new())).exit_code(), 3);
    assert_eq!(CliError::CheckFailed(String::new()).exit_code(), 4);
}

#[test]
fn shipped_configs_solve() {
    for name in ["example_beta_pos.toml", "example_beta_neg.toml"] {
        let dir = tempfile::tempdir().unwrap();
        let out = binary().arg("--config").arg(shipped(name)).arg("--out").arg(dir.path()).output().unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let doc: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("solution.json")).unwrap()).unwrap();
        assert!(doc["b_star"].is_f64());
        assert!(doc["smooth_fit_residual"].as_f64().unwrap() <= 1e-6);
        assert!(doc["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
        assert_eq!(doc["value_grid"].as_array().unwrap().len(), 141);
    }
}

#[test]
fn curve_minimum_at_optimal_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let out = binary()
        .arg("--config")
        .arg(shipped("example_beta_pos.toml"))
        .arg("--out")
        .arg(dir.path())
        .args(["--command", "curve"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let mut r = csv::Reader::from_path(dir.path().join("curve.csv")).unwrap();
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["x", "v_bstar", "dv_bstar", "v_b-1", "v_b-0.5", "v_b+0.5", "v_b+1"]);
    for rec in r.records() {
        let v: Vec<f64> = rec.unwrap().iter().map(|s| s.parse().unwrap()).collect();
        for other in &v[3..] {
            assert!(v[1] <= other + 1e-7, "x={}: {} > {}", v[0], v[1], other);
        }
    }
}

#[test]
fn round_trip_gives_identical_plan() {
    let text = std::fs::read_to_string(shipped("example_beta_neg.toml")).unwrap();
    let cfg = RunConfig::from_toml(&text).unwrap();
    let again = RunConfig::from_toml(&cfg.to_toml()).unwrap();
    assert_eq!(cfg, again);
    let dir = tempfile::tempdir().unwrap();
    let a = run(&cfg, &dir.path().join("a")).unwrap();
    let b = run(&again, &dir.path().join("b")).unwrap();
    assert_eq!(a.summary, b.summary);
    let read = |p: &Path| std::fs::read_to_string(p).unwrap();
    assert_eq!(read(&dir.path().join("a/solution.json")), read(&dir.path().join("b/solution.json")));
}

#[test]
fn simulate_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), SMALL);
    let go = |seed: &str, sub: &str| {
        let out = binary()
            .arg("--config")
            .arg(&cfg)
            .arg("--out")
            .arg(dir.path().join(sub))
            .args(["--command", "simulate", "--seed", seed])
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::read_to_string(dir.path().join(sub).join("estimate.json")).unwrap()
    };
    let (a, b, c) = (go("7", "a"), go("7", "b"), go("8", "c"));
    assert_eq!(a, b);
    assert_ne!(a, c);
    let doc: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(doc["seed"], 7);
    for e in doc["estimates"].as_array().unwrap() {
        let dev = (e["mean"].as_f64().unwrap() - e["analytic"].as_f64().unwrap()).abs();
        assert!(dev <= 4.0 * (e["stderr"].as_f64().unwrap() + e["tail_bound"].as_f64().unwrap()) + 0.02);
    }
}

#[test]
fn check_scale_and_convergence_commands() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::from_toml(SMALL).unwrap();
    cfg.command.name = CommandName::Check;
    run(&cfg, dir.path()).unwrap();
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("check.json")).unwrap()).unwrap();
    assert_eq!(doc["passed"], true);

    cfg.command.name = CommandName::Scale;
    run(&cfg, dir.path()).unwrap();
    let text = std::fs::read_to_string(dir.path().join("scale.csv")).unwrap();
    assert!(text.starts_with("x,W,dW,Theta,Z,Zbar\n"));
    let row1: Vec<f64> = text.lines().nth(3).unwrap().split(',').map(|s| s.parse().unwrap()).collect();
    assert!((row1[1] - (1f64.exp() - (-2f64).exp()) / 3.0).abs() < 1e-12);

    cfg.command.name = CommandName::Convergence;
    cfg.command.delta_grid = Some(vec![1.0, 10.0, 100.0]);
    run(&cfg, dir.path()).unwrap();
    let text = std::fs::read_to_string(dir.path().join("convergence_thresholds.csv")).unwrap();
    assert!(text.starts_with("delta,b_star,delta_phi_q,delta_W_at_1\n"));
    assert_eq!(text.lines().count(), 4);
    let values = std::fs::read_to_string(dir.path().join("convergence_values.csv")).unwrap();
    assert_eq!(values.lines().count(), 1 + 4 * 3);
}

#[test]
fn json_only_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), &format!("{SMALL}\n[output]\ndirectory = \"x\"\nformats = [\"json\"]\n"));
    let out = binary().arg("--config").arg(&cfg).arg("--out").arg(dir.path().join("o")).output().unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("o/solution.json").exists());
    assert!(!dir.path().join("o/solution_values.csv").exists());
}
