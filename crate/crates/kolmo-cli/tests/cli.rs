use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn kolmo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kolmo")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

const HALFLINE: &str = r#"
seed = 11
[space]
lambdas = [0.5]
cells_per_axis = 100
[convex_set]
kind = "halfspace"
direction = [1.0]
[solve]
lambda = 1.0
rhs = { constant = 1.0 }
[sde]
dt = 1e-2
T = 8.0
paths = 2000
probes = [[-0.5]]
"#;

#[test]
fn list_presets_prints_all_names() {
    let o = kolmo(&["list-presets"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    for n in kolmo_cli::presets::NAMES {
        assert!(text.lines().any(|l| l == n), "{n}");
    }
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let typo = write(dir.path(), "typo.toml", "[space]\nlambdas = [0.5]\n[solve]\nlamda = 1.0\n");
    let o = kolmo(&["solve", "--config", &typo]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("lamda"));

    let ascending = HALFLINE.replace("rhs = {", "alpha_sweep = [0.1, 0.5]\nrhs = {");
    let p = write(dir.path(), "asc.toml", &ascending);
    assert_eq!(code(&kolmo(&["penalize-sweep", "--config", &p])), 2);

    let whole = HALFLINE.replace("rhs = {", "mode = \"whole\"\nrhs = {");
    let p = write(dir.path(), "whole.toml", &whole);
    assert_eq!(code(&kolmo(&["flux-check", "--config", &p])), 2);

    let outside = HALFLINE.replace("[[-0.5]]", "[[0.5]]");
    let p = write(dir.path(), "outside.toml", &outside);
    let o = kolmo(&["feynman-kac", "--config", &p]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("outside C"));

    assert_eq!(code(&kolmo(&["solve", "--preset", "no-such-preset"])), 2);
    assert_eq!(code(&kolmo(&["solve"])), 2);
}

#[test]
fn missing_config_file_is_a_resource_error() {
    assert_eq!(code(&kolmo(&["solve", "--config", "/nonexistent/kolmo.toml"])), 4);
}

#[test]
fn constant_data_gives_one_over_lambda() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", HALFLINE);
    let out = dir.path().join("fk");
    let o = kolmo(&["feynman-kac", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r: Value = serde_json::from_slice(&std::fs::read(out.join("report.json")).unwrap()).unwrap();
    let p = &r["probes"][0];
    assert!((p["u_pde"]["value"].as_f64().unwrap() - 1.0).abs() < 1e-8);
    assert!((p["u_mc"]["value"].as_f64().unwrap() - 1.0).abs() < 1e-3);
    assert!(p["pass"].as_bool().unwrap());
    assert!(p["u_mc"]["provenance"].as_str().unwrap().contains("Monte Carlo"));
}

#[test]
fn validate_config_reports_dimension() {
    let o = kolmo(&["validate-config", "--preset", "rd-3mode"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["dimension"], 3);
}

fn result_hashes(dir: &Path) -> Vec<(String, String)> {
    let m: Value = serde_json::from_slice(&std::fs::read(dir.join("manifest.json")).unwrap()).unwrap();
    m["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| (f["name"].as_str().unwrap().to_string(), f["sha256"].as_str().unwrap().to_string()))
        .collect()
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let text = HALFLINE.replace("constant = 1.0", "constant = 1.0, expr = \"x0 * x0\"");
    let cfg = write(dir.path(), "c.toml", &text);
    let mut runs = Vec::new();
    for threads in ["1", "2", "1"] {
        let out = dir.path().join(format!("run{}", runs.len()));
        let o = kolmo(&["feynman-kac", "--config", &cfg, "--threads", threads, "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0);
        runs.push(result_hashes(&out));
    }
    assert!(!runs[0].is_empty());
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);
    // a different seed changes the Monte Carlo column
    let out = dir.path().join("seeded");
    kolmo(&["feynman-kac", "--config", &cfg, "--seed", "12", "--out", out.to_str().unwrap()]);
    assert_ne!(result_hashes(&out), runs[0]);
}

#[test]
fn manifest_echoes_the_resolved_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("h");
    let o = kolmo(&["solve", "--preset", "hermite-1d", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let m: Value = serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["config"]["space"]["cells_per_axis"], 400);
    assert_eq!(m["command"], "solve");
    assert!(m["version"].is_string());
    let echoed: kolmo_cli::ExperimentConfig = serde_json::from_value(m["config"].clone()).unwrap();
    assert_eq!(echoed, kolmo_cli::presets::load("hermite-1d").unwrap());
    for f in m["files"].as_array().unwrap() {
        let bytes = std::fs::read(out.join(f["name"].as_str().unwrap())).unwrap();
        assert_eq!(kolmo_cli::output::sha256_hex(&bytes), f["sha256"].as_str().unwrap());
    }
}

#[test]
fn constant_data_has_zero_flux_on_every_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let text = HALFLINE.replace("rhs = {", "refine = [20, 40, 80]\nrhs = {");
    let cfg = write(dir.path(), "c.toml", &text);
    let out = dir.path().join("flux");
    let o = kolmo(&["flux-check", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r: Value = serde_json::from_slice(&std::fs::read(out.join("report.json")).unwrap()).unwrap();
    let rows = r["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for row in rows {
        assert!(row["flux"]["flux_surface_norm"].as_f64().unwrap() < 1e-8);
    }
    assert!(std::fs::read_to_string(out.join("flux.csv")).unwrap().starts_with("cells,h_max,flux_surface_norm"));
}

#[test]
fn single_alpha_sweep_gives_no_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let text = HALFLINE.replace("rhs = {", "alpha_sweep = [0.25]\nrhs = {");
    let cfg = write(dir.path(), "c.toml", &text);
    let out = dir.path().join("sweep");
    let o = kolmo(&["penalize-sweep", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("single alpha"));
    let r: Value = serde_json::from_slice(&std::fs::read(out.join("report.json")).unwrap()).unwrap();
    assert!(r["error_monotone"].is_null());
    assert_eq!(r["rows"].as_array().unwrap().len(), 1);
}

#[test]
fn sweep_on_the_preset_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    let o = kolmo(&["penalize-sweep", "--preset", "penalize-sweep-1d", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let r: Value = serde_json::from_slice(&std::fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(r["error_monotone"], true);
    assert_eq!(r["mass_decreasing"], true);
    assert!(r["rows"][0]["outside_mass"]["provenance"].is_string());
}
