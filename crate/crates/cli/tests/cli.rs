use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(format!("{name}.json"))
}

fn verify(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_verify")).args(args).output().expect("run verify")
}

fn run_to_report(path: &Path, extra: &[&str]) -> (i32, Value) {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let mut args = vec!["--scenario", path.to_str().unwrap(), "--report", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = verify(&args);
    let code = o.status.code().unwrap();
    let report = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    (code, report)
}

fn write_temp(dir: &tempfile::TempDir, body: &str) -> PathBuf {
    let p = dir.path().join("scenario.json");
    std::fs::write(&p, body).unwrap();
    p
}

fn suite<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["suites"].as_array().unwrap().iter().find(|s| s["name"] == name).unwrap()
}

#[test]
fn list_suites_prints_the_registry() {
    let o = verify(&["--list-suites"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for name in pqk_cli::suites::names() {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name} missing");
    }
}

#[test]
fn flat_slice_kahler_passes_tightly() {
    let (code, r) = run_to_report(&scenario("flat_slice_kahler"), &[]);
    assert_eq!(code, 0);
    assert_eq!(r["passed"], true);
    for s in r["suites"].as_array().unwrap() {
        assert!(s["max"].as_f64().unwrap() <= 1e-6, "{}", s["name"]);
        assert_eq!(s["evaluated"], 6);
    }
    assert_eq!(r["classification"]["verdict"]["kahler"], true);
    assert_eq!(r["classification"]["verdict"]["totally_complex"], true);
    assert_eq!(r["classification"]["verdict"]["totally_geodesic"], true);
    assert!(r["ambient"]["gate"].is_null());
}

#[test]
fn projective_ricci_reports_space_form_ricci_and_gate() {
    let (code, r) = run_to_report(&scenario("projective_ricci"), &[]);
    assert_eq!(code, 0);
    let ric = suite(&r, "ricci_space_form");
    assert!(ric["max"].as_f64().unwrap() <= 1e-3);
    let gate = &r["ambient"]["gate"];
    assert!((gate["nu_hat"].as_f64().unwrap() - 4.0).abs() < 1e-3);
    assert!(gate["points"].as_array().unwrap().len() >= 5);
    assert!(gate["worst_einstein_residual"].as_f64().unwrap() <= 1e-3);
}

#[test]
fn graph_report_records_the_placement() {
    let (code, r) = run_to_report(&scenario("paracomplex_graph"), &[]);
    assert_eq!(code, 0);
    assert_eq!(r["immersion"]["placement_trials"].as_array().unwrap().len(), 4);
    assert!(r["immersion"]["placement"].is_string());
    assert_eq!(r["classification"]["verdict"]["totally_geodesic"], false);
}

#[test]
fn report_goes_to_stdout_without_report_flag() {
    let o = verify(&["--scenario", scenario("flat_pq_slice").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["classification"]["verdict"]["para_quaternionic"], true);
}

#[test]
fn malformed_scenario_exits_2_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_temp(&dir, "{\n  \"ambient\": {\"kind\": \"flat\", \"n\": 1, \"epsilon\": -1},\n  \"suites\": [\"gauss\",]\n}\n");
    let o = verify(&["--scenario", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 3, column"), "{err}");
}

#[test]
fn semantic_input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let base = r#"{"ambient": {"kind": "flat", "n": 1, "epsilon": -1}, "immersion": {"kind": "slice", "k": 1},
                   "points": {"count": 2}, "suites": ["gauss"]}"#;
    for bad in [
        base.replace("\"gauss\"", "\"nope\""),
        base.replace("\"epsilon\": -1", "\"epsilon\": 0"),
        base.replace("\"k\": 1", "\"k\": 2"),
        base.replace("\"suites\"", "\"tolerances\": {\"gauss\": 0}, \"suites\""),
        base.replace("{\"count\": 2}", "[[0.1, 0.2, 0.3]]"),
    ] {
        let p = write_temp(&dir, &bad);
        let o = verify(&["--scenario", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{bad}");
    }
    let o = verify(&["--scenario", "/nonexistent/scenario.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn coarse_step_fails_the_chart_gate_with_exit_3() {
    let o = verify(&["--scenario", scenario("projective_ricci").to_str().unwrap(), "--fd-step", "0.2"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8(o.stderr).unwrap().contains("chart validation failed"));
}

#[test]
fn tightened_tolerances_give_exit_1() {
    let (code, r) = run_to_report(&scenario("paracomplex_graph"), &["--tol-scale", "1e-12"]);
    assert_eq!(code, 1);
    assert_eq!(r["passed"], false);
    assert_eq!(suite(&r, "fundamental")["passed"], false);
}

#[test]
fn no_valid_points_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_temp(
        &dir,
        r#"{"ambient": {"kind": "projective", "n": 1, "epsilon": 1, "scale": 1.0},
            "immersion": {"kind": "slice", "k": 1}, "points": [[0.0, 1.0]], "suites": ["gauss"]}"#,
    );
    let o = verify(&["--scenario", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8(o.stderr).unwrap().contains("no valid sample points"));
}

#[test]
fn seed_override_moves_the_points_and_is_echoed() {
    let path = scenario("flat_pq_slice");
    let (_, a) = run_to_report(&path, &[]);
    let (_, b) = run_to_report(&path, &["--seed", "77"]);
    assert_ne!(a["points"], b["points"]);
    assert_eq!(b["scenario"]["points"]["seed"], 77);
}

#[test]
fn inapplicable_suite_fails_rather_than_passing_vacuously() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_temp(
        &dir,
        r#"{"ambient": {"kind": "flat", "n": 1, "epsilon": -1}, "immersion": {"kind": "pq_slice", "k": 1},
            "points": {"count": 2}, "suites": ["shape"]}"#,
    );
    let (code, r) = run_to_report(&p, &[]);
    assert_eq!(code, 1);
    let s = suite(&r, "shape");
    assert_eq!(s["evaluated"], 0);
    assert!(s["max"].is_null());
}
