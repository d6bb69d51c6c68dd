//! End-to-end runs of the `modstab` subcommands through `run_with`.

use std::fs;
use std::path::Path;

use modstab::cli::sweep::csv_header;
use modstab::cli::{run_with, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, EXIT_VERIFY};
use modstab::persist;
use modstab::wave::TravelingWave;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("modstab").chain(args.iter().copied());
    let code = run_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn solve_kdv(dir: &Path) -> String {
    let path = dir.join("wave.json").display().to_string();
    let (code, _, err) = run(&["solve", "--equation", "kdv", "--k", "1", "--amplitude", "0.1", "--modes", "32", "--out", &path]);
    assert_eq!(code, EXIT_OK, "{err}");
    path
}

#[test]
fn catalogue_lists_the_models() {
    let (code, out, _) = run(&["catalogue"]);
    assert_eq!(code, EXIT_OK);
    for name in ["kdv", "whitham", "ilw", "kawahara", "fornberg-whitham", "benjamin-ono"] {
        assert!(out.contains(name), "{name}");
    }
    let (code, json, _) = run(&["catalogue", "--json"]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert!(v.as_array().unwrap().len() >= 6);
}

#[test]
fn solved_wave_round_trips_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let path = solve_kdv(dir.path());
    let w: TravelingWave = persist::load(&path).unwrap();
    assert_eq!(w.modes(), 32);
    let again = dir.path().join("again.json");
    persist::save(&w, &again).unwrap();
    let back: TravelingWave = persist::load(&again).unwrap();
    assert_eq!(back, w);
    assert_eq!(fs::read_to_string(&path).unwrap(), fs::read_to_string(&again).unwrap());
}

#[test]
fn verify_reports_connection_pass() {
    let dir = tempfile::tempdir().unwrap();
    let path = solve_kdv(dir.path());
    let report = dir.path().join("report.json");
    let (code, out, err) = run(&["verify", &path, "--report", report.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{out}{err}");
    assert!(out.contains("connection: pass"), "{out}");
    assert!(report.exists());
}

#[test]
fn impossible_tolerance_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let path = solve_kdv(dir.path());
    let (code, out, _) = run(&["verify", &path, "--tol-identities", "1e-30"]);
    assert_eq!(code, EXIT_VERIFY, "{out}");
}

#[test]
fn analysis_subcommands_run() {
    let dir = tempfile::tempdir().unwrap();
    let path = solve_kdv(dir.path());
    let d = dir.path().join("d.json").display().to_string();
    assert_eq!(run(&["derivs", &path, "--out", &d]).0, EXIT_OK);
    assert_eq!(run(&["kernel-check", &path]).0, EXIT_OK);
    let m = dir.path().join("m.json").display().to_string();
    let (code, out, _) = run(&["modmatrix", &path, "--out", &m]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("strictly-hyperbolic"), "{out}");
    assert_eq!(run(&["bloch", &path, "--tau", "-0.01", "--form", "taylor2"]).0, EXIT_OK);
}

#[test]
fn future_schema_is_a_numeric_failure() {
    let dir = tempfile::tempdir().unwrap();
    let path = solve_kdv(dir.path());
    let text = fs::read_to_string(&path).unwrap().replacen("\"version\": 1", "\"version\": 99", 1);
    fs::write(&path, text).unwrap();
    let (code, _, err) = run(&["verify", &path]);
    assert_eq!(code, EXIT_NUMERIC, "{err}");
}

#[test]
fn bad_arguments_are_usage_errors() {
    assert_eq!(run(&["solve", "--equation", "nope", "--k", "1", "--amplitude", "0.1"]).0, EXIT_USAGE);
    assert_eq!(run(&["solve", "--equation", "kdv"]).0, EXIT_USAGE);
    assert_eq!(run(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(run(&["sweep", "/nonexistent/config.toml"]).0, EXIT_USAGE);
    let dir = tempfile::tempdir().unwrap();
    let path = solve_kdv(dir.path());
    assert_eq!(run(&["bloch", &path, "--tau", "0.7"]).0, EXIT_USAGE);
}

fn write_config(dir: &Path, grid: &str) -> String {
    let out = dir.join("out");
    let text = format!(
        "output = {:?}\n\n[equation]\nname = \"whitham\"\n\n[grid]\n{grid}\n\n[solver]\nmodes = 24\n",
        out.display().to_string()
    );
    let p = dir.join("run.toml");
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn empty_grid_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "k = []\namplitude = 0.01");
    assert_eq!(run(&["sweep", &cfg]).0, EXIT_USAGE);
}

#[test]
fn sweep_writes_one_row_per_point_and_resumes_identically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "k = { start = 1.0, stop = 1.3, steps = 4 }\namplitude = [0.01, 0.02]");
    let (code, out, err) = run(&["sweep", &cfg]);
    assert_eq!(code, EXIT_OK, "{out}{err}");
    let csv_path = dir.path().join("out").join("sweep.csv");
    let full = fs::read_to_string(&csv_path).unwrap();
    let lines: Vec<&str> = full.lines().collect();
    assert_eq!(lines[0], csv_header().join(","));
    assert_eq!(lines.len(), 1 + 8);
    assert!(dir.path().join("out").join("boundary.csv").exists());

    // rerun from scratch is deterministic
    assert_eq!(run(&["sweep", &cfg]).0, EXIT_OK);
    assert_eq!(fs::read_to_string(&csv_path).unwrap(), full);

    // drop the tail, including half a row, then resume
    let cut = lines[..5].join("\n") + "\n" + &lines[5][..lines[5].len() / 2];
    fs::write(&csv_path, cut).unwrap();
    assert_eq!(run(&["sweep", &cfg, "--resume"]).0, EXIT_OK);
    assert_eq!(fs::read_to_string(&csv_path).unwrap(), full);
}
