use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

use plankforge::report::canonical_json;
use plankforge::summability::WeightMatrix;

fn plankforge(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_plankforge"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("PLANKFORGE_THREADS", t),
        None => cmd.env_remove("PLANKFORGE_THREADS"),
    };
    cmd.output().expect("binary runs")
}

fn run_ok(args: &[&str]) -> Value {
    let out = plankforge(args, None);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json report")
}

fn run_ok_file(args: &[&str]) {
    let out = plankforge(args, None);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

fn p(path: &Path) -> String {
    path.to_string_lossy().into_owned()
}

#[test]
fn constructed_main_weights_validate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c");
    run_ok_file(&["construct", "--family", "power:1:0.5", "--n", "100", "--mode", "main", "--out", &p(&out)]);
    let report = run_ok(&["validate", "--weights", &p(&out.join("weights.txt"))]);
    assert_eq!(report["report"]["pass"], Value::Bool(true));
    assert_eq!(report["report"]["rows"], Value::from(100));
    assert_eq!(report["command"], "validate");
    assert!(report["version"].as_str().unwrap().starts_with("plankforge "));
}

#[test]
fn block_construction_writes_block_sums() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b");
    run_ok_file(&["construct", "--family", "power:1:0.5", "--mode", "block", "--p-prime", "1.5", "--blocks", "3", "--out", &p(&out)]);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let sums = report["report"]["block_sums"].as_array().unwrap();
    assert_eq!(sums.len(), 3);
    assert_eq!(report["report"]["validation_pass"], Value::Bool(true));
    assert!(report["report"]["space"].as_str().unwrap().starts_with("lp:3:"));
}

#[test]
fn orthogonal_witness_from_family() {
    let report = run_ok(&["witness", "--family", "power:1:1", "--n", "10"]);
    assert_eq!(report["report"]["success"], Value::Bool(true));
    assert!(report["report"]["min_margin"].as_f64().unwrap() >= 0.09);
    assert_eq!(report["report"]["margins"].as_array().unwrap().len(), 10);
}

#[test]
fn empty_plank_family_leaves_everything_uncovered() {
    let report = run_ok(&["coverage", "--space", "euclidean-real:4", "--samples", "200"]);
    assert_eq!(report["report"]["uncovered_fraction"].as_f64(), Some(1.0));
}

#[test]
fn weight_json_round_trips_through_validate() {
    let dir = tempfile::tempdir().unwrap();
    let w = WeightMatrix::from_rows(vec![vec![(1, 0.1), (2, 0.9)], vec![(2, 1.0 / 3.0), (3, 2.0 / 3.0)]]).unwrap();
    let path = dir.path().join("w.json");
    std::fs::write(&path, canonical_json(&w.to_json_value())).unwrap();
    let back = WeightMatrix::parse(&std::fs::read_to_string(&path).unwrap()).unwrap();
    for n in 1..=2 {
        assert_eq!(w.row(n).unwrap().iter().collect::<Vec<_>>(), back.row(n).unwrap().iter().collect::<Vec<_>>());
    }
    let report = run_ok(&["validate", "--weights", &p(&path), "--column-threshold", "1.1"]);
    assert_eq!(report["report"]["pass"], Value::Bool(true));
}

#[test]
fn csv_has_one_line_per_record() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c");
    run_ok_file(&["construct", "--family", "power:1:0.5", "--n", "40", "--out", &p(&out)]);
    let seq = dir.path().join("a.txt");
    std::fs::write(&seq, (1..=40).map(|m| format!("{}", 1.0 / m as f64)).collect::<Vec<_>>().join(" ")).unwrap();
    let o = plankforge(&["transform", "--weights", &p(&out.join("weights.txt")), "--sequence", &p(&seq), "--format", "csv"], None);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 41);
    assert_eq!(text.lines().next(), Some("row,value"));
}

#[test]
fn failed_checks_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "rows=2 tol=1e-12\n1:0.5 2:0.4\n2:1\n").unwrap();
    let o = plankforge(&["validate", "--weights", &p(&bad)], None);
    assert_eq!(o.status.code(), Some(2));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["report"]["pass"], Value::Bool(false));

    // Weights summing to 0.2 break the Hölder split for unit norms.
    let light = dir.path().join("light.txt");
    std::fs::write(&light, "rows=1 tol=1e-12\n1:0.1 2:0.1\n").unwrap();
    let o = plankforge(&["holder", "--weights", &p(&light), "--family", "power:1:0"], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn input_errors_exit_one_and_name_the_problem() {
    let o = plankforge(&["necessary", "--family", "power:x:1"], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--family"));

    let o = plankforge(&["validate", "--weights", "/nonexistent/w.txt"], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/w.txt"));

    let o = plankforge(&["witness", "--n", "3"], None);
    assert_eq!(o.status.code(), Some(1));

    let o = plankforge(&["necessary", "--family", "power:1:1"], Some("many"));
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("PLANKFORGE_THREADS"));

    let o = plankforge(&["counterexample", "--family", "power:1:1", "--n", "10"], None);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let vectors = dir.path().join("v.csv");
    std::fs::write(&vectors, "complex=true\n1,0,0,2,1,1\n0,1,3,0,-1,0\n2,2,0,0,0,1\n1,-1,1,-1,1,-1\n").unwrap();
    let v = p(&vectors);
    let commands: Vec<Vec<&str>> = vec![
        vec!["coverage", "--family", "power:1:1", "--n", "6", "--samples", "3000", "--seed", "5"],
        vec!["cotype", "--vectors", &v],
        vec!["witness", "--vectors", &v, "--restarts", "16", "--budget", "1000", "--seed", "2"],
        vec!["counterexample", "--n", "300", "--samples", "12"],
        vec!["bound", "--family", "power:1:0.5", "--n", "50", "--samples", "6"],
    ];
    for args in &commands {
        let one = plankforge(args, Some("1"));
        let four = plankforge(args, Some("4"));
        assert_eq!(one.status.code(), Some(0), "{}", String::from_utf8_lossy(&one.stderr));
        assert_eq!(one.stdout, four.stdout, "{args:?}");
    }
}

#[test]
fn complex_vector_files_are_read_as_complex_models() {
    let dir = tempfile::tempdir().unwrap();
    let vectors = dir.path().join("v.csv");
    std::fs::write(&vectors, "complex=true\n3,0,0,0\n0,0,0,4\n").unwrap();
    let report = run_ok(&["witness", "--vectors", &p(&vectors), "--restarts", "1", "--budget", "0"]);
    assert_eq!(report["report"]["closed_form"], Value::Bool(true));
    assert!((report["report"]["min_margin"].as_f64().unwrap() - 0.1).abs() < 1e-12);
    let cot = run_ok(&["cotype", "--vectors", &p(&vectors)]);
    assert!((cot["report"]["ratio"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(cot["report"]["enumerated"], Value::from(2));
}
