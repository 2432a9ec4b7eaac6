use std::path::Path;
use std::process::{Command, Output};

use myopic_bounds::model::model_to_json;
use myopic_bounds::BuiltinExample;

fn myopic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_myopic")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn check_writes_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("check.json");
    let o = myopic(&["check", "--example", "1", "--out", out.to_str().unwrap(), "--format", "json", "--strict"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("overall true"));
    let doc = read_json(&out);
    assert_eq!(doc["overall"], serde_json::Value::Bool(true));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(myopic(&["check"]).status.code(), Some(2));
    assert_eq!(myopic(&["check", "--example", "9"]).status.code(), Some(2));
    assert_eq!(myopic(&["check", "--example", "1", "--rho", "1.5"]).status.code(), Some(2));
    assert_eq!(myopic(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(myopic(&["sweep", "--example", "1", "--outside", "best"]).status.code(), Some(2));
    assert_eq!(myopic(&["check", "--example", "1", "--format", "csv"]).status.code(), Some(2));
    assert_eq!(myopic(&["check", "--example", "2d", "--theta", "0", "0"]).status.code(), Some(2));
}

#[test]
fn missing_model_file_is_usage_error() {
    let o = myopic(&["check", "--model", "/nonexistent/model.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_is_deterministic_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let o = myopic(&[
            "sweep",
            "--example",
            "1",
            "--rho",
            "0.5",
            "--rho",
            "0.8",
            "--seed",
            "7",
            "--runs",
            "50",
            "--horizon",
            "30",
            "--volume-samples",
            "5000",
            "--threads",
            "2",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn model_file_matches_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let model_path = dir.path().join("ex1.json");
    let model = BuiltinExample::One.model::<f64>().unwrap();
    std::fs::write(&model_path, model_to_json(&model)).unwrap();

    let from_example = dir.path().join("a.json");
    let from_file = dir.path().join("b.json");
    let o = myopic(&["check", "--example", "1", "--out", from_example.to_str().unwrap()]);
    assert!(o.status.success());
    let o = myopic(&["check", "--model", model_path.to_str().unwrap(), "--out", from_file.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read_json(&from_example), read_json(&from_file));

    let sim = |args: &[&str]| {
        let mut full = vec!["simulate", "--seed", "3", "--runs", "40", "--horizon", "20", "--belief", "1,0,0"];
        full.extend_from_slice(args);
        let o = myopic(&full);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        stdout(&o).lines().nth(1).unwrap().to_string()
    };
    assert_eq!(sim(&["--example", "1"]), sim(&["--model", model_path.to_str().unwrap()]));
}

#[test]
fn example4_bounds_at_origin() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bounds.json");
    let o = myopic(&[
        "bounds",
        "--example",
        "4",
        "--theta",
        "0",
        "0",
        "--belief",
        "0.2,0.3,0.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = read_json(&out);
    assert_eq!(doc["model"], "4(0,0)");
    assert_eq!(doc["upper"]["status"], "solved");
    assert_eq!(doc["lower"]["status"], "solved");
    let (lo, up) = (doc["belief_bounds"]["lower"].as_u64().unwrap(), doc["belief_bounds"]["upper"].as_u64().unwrap());
    assert!(lo <= up, "{doc}");
}
