//! End-to-end tests of the binary: exit codes, report shapes, and
//! byte-determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ctxkit"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not json: {e}\nstdout: {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn extract_fixtures(dir: &Path) {
    let out = run(&["fixtures", "--extract", dir.to_str().unwrap()]);
    assert!(out.status.success());
}

fn tmpdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ctxkit-test-{name}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn fixtures_list_and_show() {
    let out = run(&["fixtures", "--list"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("pr-box.json"));
    assert!(text.contains("appendix-c.json"));

    let out = run(&["fixtures", "--show", "pr-box.json"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("\"tables\""));

    let out = run(&["fixtures", "--show", "nope.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn builtin_counterfactual_is_infeasible_with_oracle_agreement() {
    let out = run(&["counterfactual"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["verdict"]["result"]["verdict"], "INFEASIBLE");
    let sweep = v["verdict"]["drop_one"].as_array().unwrap();
    assert_eq!(sweep.len(), 5);
    for entry in sweep {
        assert_eq!(entry["oracle_agrees"], true);
        assert_eq!(entry["result"]["verdict"], "INFEASIBLE");
    }
}

#[test]
fn classify_levels_match_fixtures() {
    let dir = tmpdir("classify");
    extract_fixtures(&dir);
    for (file, level) in [
        ("pr-box.json", "strong"),
        ("chsh-quantum.json", "probabilistic"),
        ("classical-uniform.json", "noncontextual"),
        ("hardy.json", "possibilistic"),
    ] {
        let out = run(&["classify", dir.join(file).to_str().unwrap()]);
        assert!(out.status.success(), "{file}");
        let v = stdout_json(&out);
        assert_eq!(v["verdict"]["level"], level, "{file}");
    }
}

#[test]
fn validate_exit_codes() {
    let dir = tmpdir("validate");
    extract_fixtures(&dir);
    // valid scenario: exit 0, empty violations
    let out = run(&["validate", dir.join("bell-scenario.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["verdict"]["valid"], true);

    // invalid model: exit 1, condition list present
    let model = ctxkit::fixtures::compress_contextual_model();
    let mut bad = model.clone();
    bad.preparations
        .insert("broken".into(), vec![0.7, 0.4, 0.1]);
    let path = dir.join("bad-model.json");
    std::fs::write(&path, bad.to_json()).unwrap();
    let out = run(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let v = stdout_json(&out);
    assert_eq!(v["verdict"]["valid"], false);
    assert_eq!(v["verdict"]["violated_conditions"], serde_json::json!([2]));

    // malformed json: exit 2 with a parse diagnostic
    let path = dir.join("broken.json");
    std::fs::write(&path, "{ not json").unwrap();
    let out = run(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn cap_exceeded_is_exit_three() {
    let dir = tmpdir("cap");
    extract_fixtures(&dir);
    let out = run(&[
        "classify",
        dir.join("pr-box.json").to_str().unwrap(),
        "--cap",
        "8",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn graph_pentagon_invariants_and_dot() {
    let dir = tmpdir("graph");
    extract_fixtures(&dir);
    let dot = dir.join("kcbs.dot");
    let out = run(&[
        "graph",
        dir.join("kcbs-scenario.json").to_str().unwrap(),
        "--dot",
        dot.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    let w = &v["verdict"]["at_supplied_weights"];
    assert_eq!(w["independence_number"], 2.0);
    assert_eq!(w["fractional_packing_exact"], "5/2");
    let theta = w["lovasz_number"].as_f64().unwrap();
    assert!((theta - 5f64.sqrt()).abs() < 1e-3);
    assert_eq!(w["nchv_exists"], false);
    assert_eq!(w["squeeze_holds"], true);
    let dot_text = std::fs::read_to_string(&dot).unwrap();
    assert!(dot_text.contains("graph exclusivity"));
    assert!(dot_text.contains("-- "));
}

#[test]
fn compress_fixture_reports_negativity() {
    let dir = tmpdir("compress");
    extract_fixtures(&dir);
    let out = run(&[
        "compress",
        dir.join("compress-contextual.json").to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["verdict"]["num_quasi_states"], 2);
    assert!(!v["verdict"]["negativity"].as_array().unwrap().is_empty());

    // compression precondition failure is a domain verdict (exit 1)
    let mut skew = ctxkit::fixtures::compress_contextual_model();
    skew.preparations.insert("skew".into(), vec![0.7, 0.1, 0.2]);
    let path = dir.join("skewed.json");
    std::fs::write(&path, skew.to_json()).unwrap();
    let out = run(&["compress", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn marble_demo_runs_and_reports_gap_fields() {
    let dir = tmpdir("marble");
    extract_fixtures(&dir);
    let out = run(&["marble", dir.join("marble-demo.json").to_str().unwrap()]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    let gap = &v["verdict"]["shared_measurement_gap"];
    assert!(gap["gap"].is_number());
    assert_eq!(gap["ks_witness_found"], true);

    let out = run(&[
        "marble",
        dir.join("marble-demo.json").to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("context,outcome,frequency,std_error"));
}

#[test]
fn loop_copy_box_fails_determinism() {
    let dir = tmpdir("loop");
    extract_fixtures(&dir);
    let out = run(&["loop", dir.join("copy-box.json").to_str().unwrap()]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["verdict"]["unique_everywhere"], false);
    assert_eq!(v["verdict"]["audit"]["determinism_holds"], false);
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = tmpdir("determinism");
    extract_fixtures(&dir);
    for args in [
        vec!["classify", dir.join("pr-box.json").to_str().unwrap()],
        vec!["counterfactual"],
        vec![
            "marble",
            dir.join("marble-demo.json").to_str().unwrap(),
            "--seed",
            "9",
        ],
        vec!["graph", dir.join("kcbs-scenario.json").to_str().unwrap()],
    ] {
        let a = run(&args);
        let b = run(&args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{args:?} must be deterministic");
    }
}

#[test]
fn csv_rejected_where_undefined() {
    let dir = tmpdir("csvreject");
    extract_fixtures(&dir);
    let out = run(&[
        "classify",
        dir.join("pr-box.json").to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(2));
}
