use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn puq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_puq")).args(args).output().expect("puq runs")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn spectrum_rows_follow_energy_formula() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[spectrum]\nn_max = 1\nm_max = 1\n");
    let out = stdout(&puq(&["spectrum", "--config", &cfg, "--params", "2,1,1"]));
    let rows: Vec<&str> = out.lines().collect();
    assert_eq!(rows, ["n,m,energy,energy_f64", "0,0,1/2,0.5", "1,0,5/2,2.5", "0,1,-1/2,-0.5", "1,1,3/2,1.5"]);
}

#[test]
fn spectrum_single_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[spectrum]\nn_max = 0\nm_max = 0\n");
    let out = stdout(&puq(&["spectrum", "--config", &cfg, "--params", "5,3,1"]));
    assert_eq!(out.lines().collect::<Vec<_>>(), ["n,m,energy,energy_f64", "0,0,1,1"]);
}

#[test]
fn equal_frequency_spectrum_samples_m_and_k() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[spectrum]\nequal_frequency = true\nm_max = 2\nk_min = -1.0\nk_max = 1.0\nk_count = 3\n");
    let out = stdout(&puq(&["spectrum", "--config", &cfg, "--params", "2,2,1", "--format", "json"]));
    let v: Value = serde_json::from_str(&out).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 9);
    for r in rows {
        let (m, k) = (r["m"].as_f64().unwrap(), r["k"].as_f64().unwrap());
        assert!((r["energy"].as_f64().unwrap() - (2.0 * m - k * k)).abs() < 1e-12);
    }
    let mismatch = puq(&["spectrum", "--config", &cfg, "--params", "2,1,1"]);
    assert_eq!(mismatch.status.code(), Some(2));
}

#[test]
fn verify_default_passes_and_reports_bracket() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let o = puq(&["verify", "--output", report.to_str().unwrap()]);
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert!(v["failed"].as_array().unwrap().is_empty());
    assert_eq!(v["j1_j2"], "0");
    let checks = v["checks"].as_array().unwrap();
    assert!(checks.iter().all(|c| c["status"] == "pass"));
    assert!(checks.iter().any(|c| c["exact"] == true) && checks.iter().any(|c| c["exact"] == false));
}

#[test]
fn verify_with_shifted_energy_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[verify]\nwrong_energy = true\ngenvalue_level = 1\n");
    let o = puq(&["verify", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let failed: Vec<&str> = v["failed"].as_array().unwrap().iter().map(|x| x.as_str().unwrap()).collect();
    assert_eq!(failed, ["genvalue_residuals_pu", "genvalue_residuals_oscillator"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("genvalue_residuals_pu"));
}

#[test]
fn grid_origin_value() {
    let out = stdout(&puq(&["grid", "--params", "2,1,1/2"]));
    let value: f64 = out.lines().nth(1).unwrap().split(',').last().unwrap().parse().unwrap();
    let pi = std::f64::consts::PI;
    assert!((value - 4.0 / (pi * pi)).abs() < 1e-14, "{value}");
}

#[test]
fn grid_counts_rows_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[grid]\nobject = \"osc-psi\"\nn = 1\nm = 2\naxes = [{min = -1.0, max = 1.0, count = 3}, {min = -0.5, max = 0.5, count = 3}]\n",
    );
    let first = stdout(&puq(&["grid", "--config", &cfg]));
    assert_eq!(first.lines().count(), 10);
    assert_eq!(first.lines().next().unwrap(), "X1,X2,re,im");
    assert_eq!(first, stdout(&puq(&["grid", "--config", &cfg])));
}

#[test]
fn grid_at_equal_frequencies_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("psi.csv");
    let cfg = write_config(dir.path(), "[grid]\nobject = \"pu-psi\"\n");
    let o = puq(&["grid", "--config", &cfg, "--params", "1,1,1", "--output", target.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not normalizable"));
    assert!(!target.exists());
    let o = puq(&["grid", "--params", "1,1,1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("singular"));
}

fn transform(kind: &str, params: &str) -> Value {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("[transform]\nkind = \"{}\"\n", kind));
    serde_json::from_str(&stdout(&puq(&["transform", "--config", &cfg, "--params", params]))).unwrap()
}

#[test]
fn transform_reports() {
    let d = transform("diagonalize", "5,3,1");
    assert_eq!(d["pullback_matches"], true);
    assert_eq!(d["symplectic"], true);
    assert_eq!(d["pullback"], d["expected"]);
    assert!(d["generating_function"].is_string());
    let e = transform("equal-frequency", "1,1,1");
    assert_eq!(e["pullback_matches"], true);
    assert_eq!(e["symplectic"], true);
    let i = transform("identity", "2,1,1");
    assert_eq!(i["symplectic"], true);
    assert_eq!(i["pullback"], i["hamiltonian"]);
    let o = puq(&["transform", "--params", "3,3,1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn invalid_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    for (text, field) in [
        ("[params]\nomega1 = \"two\"\n", "params.omega1"),
        ("[params]\nomega2 = \"-1\"\n", "params"),
        ("[spectrum]\nn_mx = 1\n", "n_mx"),
        ("[quadrature]\norder = 0\n", "quadrature"),
        ("[grid]\naxes = [{min = 1.0, max = 0.0, count = 2}, {min = 0.0, max = 1.0, count = 2}, {min = 0.0, max = 1.0, count = 2}, {min = 0.0, max = 1.0, count = 2}]\n", "grid.axes[0]"),
        ("[verify]\ntriangle_points = 1\n", "verify.triangle_points"),
    ] {
        let target = dir.path().join("out.csv");
        let cfg = write_config(dir.path(), text);
        let o = puq(&["spectrum", "--config", &cfg, "--output", target.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{text}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(field), "{text}: {err}");
        assert!(!target.exists());
    }
    assert_eq!(puq(&["spectrum", "--params", "1,2"]).status.code(), Some(2));
    assert_eq!(puq(&["bogus"]).status.code(), Some(2));
}

#[test]
fn config_round_trips_through_the_binary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[params]\nomega1 = \"5\"\nomega2 = \"3\"\n\n[grid]\nobject = \"osc-wigner\"\nn = 2\n");
    let once = stdout(&puq(&["config", "--config", &cfg]));
    let again = write_config(dir.path(), &once);
    assert_eq!(once, stdout(&puq(&["config", "--config", &again])));
    assert!(once.contains("osc-wigner"));
}
