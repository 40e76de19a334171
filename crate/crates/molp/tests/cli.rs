use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn molp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_molp")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is json")
}

fn strings(v: &Value) -> Vec<Vec<String>> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|p| p.as_array().unwrap().iter().map(|s| s.as_str().unwrap().to_string()).collect())
        .collect()
}

fn pts(v: &[&[&str]]) -> Vec<Vec<String>> {
    v.iter().map(|p| p.iter().map(|s| s.to_string()).collect()).collect()
}

#[test]
fn oracle_example1() {
    let out = molp(&["oracle", data("example1.toml").to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(strings(&v["x_e"]), pts(&[&["0", "4"], &["1", "2"], &["2", "1"], &["4", "0"]]));
    assert_eq!(v["edges"].as_array().unwrap().len(), 3);
}

#[test]
fn oracle_box_only_is_origin() {
    let out = molp(&["oracle", data("box_only.toml").to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(strings(&json(&out)["x_e"]), pts(&[&["0", "0"]]));
}

#[test]
fn infeasible_input_exits_2() {
    for cmd in ["oracle", "solve", "bounds"] {
        let out = molp(&[cmd, data("infeasible.toml").to_str().unwrap()]);
        assert_eq!(code(&out), 2, "{}", cmd);
    }
}

#[test]
fn bad_flags_and_files_exit_2() {
    assert_eq!(code(&molp(&["solve"])), 2);
    assert_eq!(code(&molp(&["frobnicate"])), 2);
    assert_eq!(code(&molp(&["solve", data("example1.toml").to_str().unwrap(), "--variant", "nope"])), 2);
    assert_eq!(code(&molp(&["solve", data("example1.toml").to_str().unwrap(), "--systems", "9"])), 2);
    assert_eq!(code(&molp(&["oracle", "/nonexistent/problem.toml"])), 2);
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "C = [[1, 0]]\nA = [[1]]\nb = [1]\nub_primal = [1, 1]\n").unwrap();
    assert_eq!(code(&molp(&["oracle", bad.to_str().unwrap()])), 2);
}

#[test]
fn help_exits_0() {
    assert_eq!(code(&molp(&["--help"])), 0);
}

#[test]
fn single_objective_solve_and_compare() {
    let f = data("single_objective.toml");
    let out = molp(&["solve", f.to_str().unwrap(), "--oracle"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(strings(&v["x_e"]), pts(&[&["0", "2"], &["2", "0"]]));
    assert_eq!(v["agreement"], Value::Bool(true));
    // the interior lattice point of the optimal segment is reported but flagged
    let flagged: Vec<_> = v["points"].as_array().unwrap().iter().filter(|p| p["extreme"] == Value::Bool(false)).collect();
    assert_eq!(flagged.len(), 1);
    assert_eq!(flagged[0]["x"], serde_json::json!(["1", "1"]));
    let out = molp(&["compare", f.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
}

#[test]
fn truncated_compare_reports_missing_points() {
    // system 1 alone cannot see (2,1) and (4,0)
    let f = data("example1.toml");
    let out = molp(&["compare", f.to_str().unwrap(), "--M", "1", "--Mi", "6", "--systems", "1", "--no-timing"]);
    assert_eq!(code(&out), 1, "{}", String::from_utf8_lossy(&out.stderr));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("missing from pipeline: (2, 1)"), "{}", err);
    assert!(err.contains("missing from pipeline: (4, 0)"), "{}", err);
    assert!(!err.contains("not in oracle set"), "{}", err);
}

#[test]
fn bounds_example1() {
    let out = molp(&["bounds", data("example1.toml").to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["M"], 6);
    assert_eq!(v["M_from_A_only"], 3);
    assert_eq!(v["M_i"], 6);
    assert_eq!(v["systems"].as_array().unwrap().len(), 3);
}

#[test]
fn export_sdpa_writes_readable_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s1.dat-s");
    let out = molp(&[
        "export-sdpa",
        data("single_objective.toml").to_str().unwrap(),
        "--system",
        "1",
        "--order",
        "2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    let parsed = molp::sdpa::read(&text).unwrap();
    assert!(parsed.nvars > 0);
    assert!(*parsed.block_struct.last().unwrap() < 0);
    let out = molp(&["export-sdpa", data("single_objective.toml").to_str().unwrap(), "--system", "2", "--order", "2"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn plot_example1_from_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("ex1");
    let out = molp(&["plot", data("example1.toml").to_str().unwrap(), "--out", prefix.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("4 points, 3 segments"));
    let pts = std::fs::read_to_string(dir.path().join("ex1_points.csv")).unwrap();
    assert_eq!(pts.lines().count(), 5);
    let edges = std::fs::read_to_string(dir.path().join("ex1_edges.csv")).unwrap();
    assert_eq!(edges.lines().count(), 4);
    let svg = std::fs::read_to_string(dir.path().join("ex1.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
}

#[test]
fn plot_singleton_and_three_dimensional() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("origin");
    let out = molp(&["plot", data("box_only.toml").to_str().unwrap(), "--out", prefix.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("1 points, 0 segments"));

    let cube = dir.path().join("cube.toml");
    std::fs::write(&cube, "C = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]\nA = [[1, 1, 1]]\nb = [1]\nub_primal = [1, 1, 1]\n").unwrap();
    let prefix = dir.path().join("cube");
    let out = molp(&["plot", cube.to_str().unwrap(), "--out", prefix.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("3 points, 3 segments"));
    assert!(dir.path().join("cube_points.csv").exists());
    assert!(!dir.path().join("cube.svg").exists());
}
