use std::path::Path;
use std::process::{Command, Output};

fn dyadic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dyadic")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const SMALL: &str = r#"{
    "model": {"lambda": 2, "theta": 1, "nu": 0.1, "mu": 0.1, "k": 6},
    "integrator": {"rtol": 1e-10, "atol": 1e-14, "t_end": 0.5, "sample_dt": 0.1}
}"#;

#[test]
fn simulate_writes_timeseries_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.json", SMALL);
    let out = dir.path().join("out");
    let o = dyadic(&["simulate", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = dyadic_lab::read_timeseries(&out.join("timeseries.csv")).unwrap();
    assert_eq!(rows.len(), 6);
    assert!(out.join("timeseries.events.json").exists());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["status"], "Completed");
    assert_eq!(summary["regime"]["regime"], "GlobalStrong");
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.json",
        r#"{"model": {"lambda": 2, "theta": 1, "delta": 3, "nu": 0.1, "mu": 0.1, "k": 6}}"#,
    );
    let o = dyadic(&["simulate", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("exactly one"));
    let cfg = write(dir.path(), "typo.json", r#"{"model": {"lambda": 2, "tehta": 1}}"#);
    assert_eq!(dyadic(&["verify", &cfg]).status.code(), Some(2));
}

#[test]
fn missing_file_exits_one() {
    assert_eq!(dyadic(&["simulate", "/nonexistent/config.json"]).status.code(), Some(1));
}

#[test]
fn verify_passes_on_a_dissipative_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "v.json",
        r#"{"model": {"lambda": 2, "theta": 1, "nu": 0.1, "mu": 0.1, "k": 8},
            "data": {"generator": "geometric", "amplitude": 1, "decay": 2},
            "integrator": {"rtol": 1e-11, "atol": 1e-15, "t_end": 5, "sample_dt": 0.001}}"#,
    );
    let o = dyadic(&["verify", &cfg]);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success(), "{text}");
    for name in ["flux_cancellation", "max_relative_residual", "leray_hopf_slack", "max_relative_excess", "triple_bounds"] {
        assert!(text.contains(&format!("PASS {name}")), "{name} missing in\n{text}");
    }
}

#[test]
fn verify_fails_with_exit_one_when_budget_is_unresolved() {
    // coarse sampling leaves a trapezoid error far above the tolerance
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "coarse.json",
        r#"{"model": {"lambda": 2, "theta": 1, "nu": 0.1, "mu": 0.1, "k": 8},
            "integrator": {"t_end": 1, "sample_dt": 0.5}}"#,
    );
    let o = dyadic(&["verify", &cfg]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL max_relative_residual"));
}

#[test]
fn constants_prints_certificate() {
    let o = dyadic(&["constants", "--lambda", "20", "--gamma", "0.05", "--theta", "3.5", "--nu", "0.01", "--mu", "0.01"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["valid"], true);
    assert_eq!(v["conditions"], serde_json::json!([true, true, true, true]));
    let m0 = v["constants"]["m0"].as_f64().unwrap();
    assert!((m0 - 8.0939405556264343056).abs() < 1e-12 * m0);

    let o = dyadic(&["constants", "--lambda", "2", "--gamma", "0.05", "--theta", "3.5", "--nu", "0.01", "--mu", "0.01"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["valid"], false);
    assert_eq!(dyadic(&["constants", "--lambda", "1", "--gamma", "0.05", "--theta", "3.5", "--nu", "0", "--mu", "0"]).status.code(), Some(2));
}

#[test]
fn regime_classifies() {
    let o = dyadic(&["regime", "--theta", "3.5", "--d_i", "1"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["regime"], "BlowupCandidate");
    let o = dyadic(&["regime", "--theta", "2", "--d_i", "0"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["regime"], "GlobalStrong");
}

#[test]
fn sweep_writes_per_point_directories() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.json",
        r#"{"model": {"lambda": 2, "theta": 1, "nu": 0.1, "mu": 0.1, "k": 6},
            "data": {"generator": "geometric", "amplitude": 1, "decay": 2},
            "integrator": {"rtol": 1e-10, "atol": 1e-14, "t_end": 0.2, "sample_dt": 0.001},
            "sweep": {"axes": {"nu": [0.1, 0.2], "amplitude": [0.5, 1]}, "cap": 2}}"#,
    );
    let out = dir.path().join("sweep");
    let o = Command::new(env!("CARGO_BIN_EXE_dyadic"))
        .args(["sweep", &cfg, "--out", out.to_str().unwrap()])
        .env("DYADIC_THREADS", "1")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    for i in 0..4 {
        let p = out.join(format!("point_{i:04}"));
        assert!(p.join("timeseries.csv").exists() && p.join("report.json").exists());
    }
    let agg: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("sweep.json")).unwrap()).unwrap();
    assert_eq!(agg.as_array().unwrap().len(), 4);
}
