use fraclap::commands::{EigReport, PohozaevStudy};
use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::Command;

const INTERVAL: &str = r#"
[domain]
dim = 1
cells = [256]
[partition]
dirichlet_faces = ["x-"]
"#;

/// `top` holds root keys, which TOML needs ahead of every section.
fn interval(top: &str, sections: &str) -> String {
    format!("s = 0.75\n{top}\n{INTERVAL}{sections}")
}

fn square(top: &str, sections: &str) -> String {
    format!("s = 0.75\n{top}\n[domain]\ndim = 2\ncells = [8]\n[partition]\ndirichlet_faces = [\"y-\"]\n{sections}")
}

fn fraclap(dir: &Path, sub: &str, config: &str, sets: &[&str]) -> (i32, Value) {
    let path = dir.join("experiment.toml");
    std::fs::write(&path, config).unwrap();
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fraclap"));
    cmd.arg(sub).arg("--config").arg(&path).arg("--set").arg(format!("output_dir={:?}", dir.join("runs").display().to_string()));
    for s in sets {
        cmd.arg("--set").arg(s);
    }
    let out = cmd.output().unwrap();
    let json = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {:?}", out));
    (out.status.code().unwrap(), json)
}

fn run_dir(v: &Value) -> PathBuf {
    PathBuf::from(v["run_dir"].as_str().unwrap())
}

#[test]
fn eig_on_the_interval_matches_the_oracle() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, v) = fraclap(tmp.path(), "eig", &interval("", ""), &["eig.count=5"]);
    assert_eq!(code, 0, "{v}");
    let mut r = csv::Reader::from_path(run_dir(&v).join("eigenvalues.csv")).unwrap();
    assert_eq!(r.headers().unwrap(), vec!["k", "lambda", "lambda_s"]);
    let rows: Vec<_> = r.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 5);
    for row in rows {
        let k: f64 = row[0].parse().unwrap();
        let l: f64 = row[1].parse().unwrap();
        let exact = ((k - 0.5) * std::f64::consts::PI).powi(2);
        assert!((l / exact - 1.0).abs() < 0.01);
        assert_eq!(row[2].parse::<f64>().unwrap(), l.powf(0.75));
    }
    let dat = std::fs::read_to_string(run_dir(&v).join("eigenvalues.dat")).unwrap();
    assert!(dat.starts_with("# k lambda\n"));
}

#[test]
fn reports_round_trip_through_json() {
    let tmp = tempfile::tempdir().unwrap();
    let (_, v) = fraclap(tmp.path(), "eig", &interval("", ""), &["eig.count=8"]);
    let text = std::fs::read_to_string(run_dir(&v).join("eig.json")).unwrap();
    let report: EigReport = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string_pretty(&report).unwrap() + "\n", text);
}

#[test]
fn unknown_keys_are_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = interval("bogus = 1", "[solver]\nmax_iters = 3\n");
    let (code, v) = fraclap(tmp.path(), "eig", &cfg, &[]);
    assert_eq!(code, 2);
    assert_eq!(v["error"]["kind"], "config");
    assert_eq!(v["error"]["keys"], serde_json::json!(["bogus", "solver.max_iters"]));
}

#[test]
fn missing_lambda_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, v) = fraclap(tmp.path(), "minimize", &interval("", ""), &[]);
    assert_eq!(code, 2);
    assert_eq!(v["error"]["keys"], serde_json::json!(["lambda", "lambda_fraction"]));
}

#[test]
fn numerical_failures_name_their_stage() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = square("lambda_fraction = 1.5", "[pohozaev]\ncells = [8]\ncylinder_levels = [16]\n");
    let (code, v) = fraclap(tmp.path(), "pohozaev", &cfg, &[]);
    assert_eq!(code, 1);
    assert_eq!(v["error"]["kind"], "numerical");
    assert_eq!(v["error"]["stage"], "minimize");
    assert!(v["error"]["message"].as_str().unwrap().contains("lambda_1s"), "{v}");
    let runs: Vec<_> = std::fs::read_dir(tmp.path().join("runs")).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(runs.len(), 1);
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(runs[0].join("error-pohozaev.json")).unwrap()).unwrap();
    assert_eq!(saved, v);
}

#[test]
fn overrides_are_recorded_and_change_the_hash() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = "s = 0.75\n[domain]\ndim = 3\n";
    let (_, a) = fraclap(tmp.path(), "constants", cfg, &[]);
    let (_, b) = fraclap(tmp.path(), "constants", cfg, &["s=0.6"]);
    assert_ne!(run_dir(&a), run_dir(&b));
    let m: Value = serde_json::from_str(&std::fs::read_to_string(run_dir(&b).join("manifest-constants.json")).unwrap()).unwrap();
    assert!(m["overrides"].as_array().unwrap().iter().any(|o| o == "s=0.6"));
    assert_eq!(m["config"]["s"], 0.6);
    assert_eq!(m["versions"]["fraclap-core"], fraclap_core::VERSION);
}

#[test]
fn pohozaev_study_on_a_square() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = square("lambda_fraction = 0.5", "[pohozaev]\ncells = [8, 12]\ncylinder_levels = [32, 64]\n");
    let (code, v) = fraclap(tmp.path(), "pohozaev", &cfg, &[]);
    assert_eq!(code, 0, "{v}");
    let study: PohozaevStudy =
        serde_json::from_str(&std::fs::read_to_string(run_dir(&v).join("pohozaev.json")).unwrap()).unwrap();
    assert_eq!(study.levels.len(), 2);
    assert_eq!(study.zero_field_residual, 0.0);
    assert!(study.levels.iter().all(|l| l.converged && l.positive));
}
