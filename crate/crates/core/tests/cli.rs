use std::path::Path;
use std::process::{Command, Output};

fn ruinlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ruinlab")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn ruin_spec(arrivals: &str, p: f64, seed: &str) -> String {
    format!(
        r#"{{
  "name": "cli",
  "experiment": {{
    "kind": "ruin",
    "risk": {{ "p": {p}, "claims": {{ "family": "pareto", "alpha": 2.0, "xm": 1.0 }}, "arrivals": {arrivals} }},
    "u_grid": [2.0, 4.0],
    "horizon": {{ "kind": "infinite" }}
  }},
  "n_paths": 2000{seed}
}}"#
    )
}

const HAWKES: &str = r#"{ "model": "hawkes", "nu": 1.0, "kernel": { "kind": "exp", "a": 0.5, "b": 1.0 } }"#;

#[test]
fn supercritical_kernel_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let arrivals = r#"{ "model": "hawkes", "nu": 1.0, "kernel": { "kind": "exp", "a": 1.2, "b": 1.0 } }"#;
    let cfg = write(dir.path(), "c.json", &ruin_spec(arrivals, 6.0, r#", "seed": 1"#));
    let out = ruinlab(&["ruin", &cfg]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn missing_seed_exits_2_and_names_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", &ruin_spec(HAWKES, 6.0, ""));
    let out = ruinlab(&["ruin", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
}

#[test]
fn infinite_horizon_without_net_profit_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", &ruin_spec(HAWKES, 2.0, r#", "seed": 1"#));
    let out = ruinlab(&["ruin", &cfg]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("warning: rho = 1.5"), "{err}");
}

#[test]
fn finite_horizon_without_net_profit_still_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", &ruin_spec(HAWKES, 2.0, r#", "seed": 1"#));
    let out = ruinlab(&["ruin", &cfg, "--horizon", "10"]);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[1], "10");
    assert_eq!(row[4], "");
}

#[test]
fn ruin_writes_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", &ruin_spec(HAWKES, 6.0, r#", "seed": 1"#));
    let out_path = dir.path().join("out/ruin.csv");
    let out = ruinlab(&["ruin", &cfg, "--paths", "1000", "--output", out_path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(&out_path).unwrap();
    assert!(csv.starts_with("u,z_or_inf,mc_estimate,std_error,asymptotic,ratio,seed\n"));
    assert_eq!(csv.lines().count(), 3);
    let sidecar: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/ruin.csv.json")).unwrap()).unwrap();
    assert_eq!(sidecar["spec"]["n_paths"], 1000);
    assert_eq!(sidecar["rho"], 0.5);
    assert!(sidecar["version"].is_string());
}

#[test]
fn validate_prints_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", &ruin_spec(HAWKES, 2.0, r#", "seed": 1"#));
    let out = ruinlab(&["validate", &cfg]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("risk/net_profit") && text.contains("FAIL"));
    assert!(text.contains("asymptotics: disabled"));
    assert_eq!(ruinlab(&["validate", &cfg, "--strict"]).status.code(), Some(1));
}

#[test]
fn rate_fn_and_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(dir.path(), "m.json", HAWKES);
    let out = ruinlab(&["rate-fn", &model, "--x-grid", "-1,2"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "x,rate\n-1,inf\n2,0\n");

    let a = ruinlab(&["simulate", &model, "--horizon", "20", "--seed", "4"]);
    let b = ruinlab(&["simulate", &model, "--horizon", "20", "--seed", "4"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(a.stdout.len() > 10);
}

#[test]
fn wrong_subcommand_for_experiment_kind() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", &ruin_spec(HAWKES, 6.0, r#", "seed": 1"#));
    let out = ruinlab(&["aggregate", &cfg]);
    assert_eq!(out.status.code(), Some(2));
}
