use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ringdec(dir: &Path, args: &[&str], config: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ringdec"));
    cmd.args(args).arg("--out").arg(dir.join("out"));
    if let Some(text) = config {
        let p = dir.join("config.json");
        fs::write(&p, text).unwrap();
        cmd.arg("--config").arg(p);
    }
    cmd.output().expect("spawn ringdec")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const WIDE: &str = r#"{"geometry": {"r1": 1e-4, "delta": 2e-6}, "times": {"count": 9}}"#;

#[test]
fn decohere_writes_curve_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = ringdec(dir.path(), &["decohere"], Some(WIDE));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("out/dcurve.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,D_quadrature,D_lowT1,D_Dfin,regime,tail_bound,quad_error"));
    assert_eq!(lines.count(), 9);
    let summary = read_json(&dir.path().join("out/summary.json"));
    assert!(summary["D_lim"]["D_lim"].as_f64().unwrap() > 0.0);
    assert!(summary["window_slope"].as_f64().is_some());
    assert_eq!(summary["spectral_band"]["empty"], Value::Bool(false));
}

#[test]
fn default_config_runs_every_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    for sub in ["spectrum", "decohere", "saturation", "dissipation", "sweep"] {
        let out = ringdec(dir.path(), &[sub], None);
        assert_eq!(out.status.code(), Some(0), "{sub}: {}", String::from_utf8_lossy(&out.stderr));
    }
    for f in [
        "spectrum.csv",
        "spectrum_bins.csv",
        "spectrum.json",
        "modes.csv",
        "dcurve.csv",
        "summary.json",
        "saturation.json",
        "dissipation.json",
        "dissipation.csv",
        "sweep.csv",
    ] {
        assert!(dir.path().join("out").join(f).exists(), "{f}");
    }
    let sat = read_json(&dir.path().join("out/saturation.json"));
    let over = sat["log_override"]["D_lim"].as_f64().unwrap();
    let u = sat["log_override"]["u"].as_f64().unwrap();
    assert!((over / u / 8.6e-8 - 1.0).abs() < 0.01);
}

#[test]
fn output_is_deterministic_across_worker_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(ringdec(a.path(), &["decohere", "--workers", "1"], Some(WIDE)).status.code(), Some(0));
    assert_eq!(ringdec(b.path(), &["decohere", "--workers", "3"], Some(WIDE)).status.code(), Some(0));
    for f in ["dcurve.csv", "summary.json"] {
        assert_eq!(
            fs::read(a.path().join("out").join(f)).unwrap(),
            fs::read(b.path().join("out").join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn regime_violations_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = ringdec(dir.path(), &["decohere"], Some(r#"{"geometry": {"r1": 2.0}}"#));
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("R1"));
    let out = ringdec(dir.path(), &["validate"], Some(r#"{"geometry": {"delta": 0.05}}"#));
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("delta/R1"));
}

#[test]
fn malformed_configs_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = ringdec(dir.path(), &["decohere"], Some(r#"{"geometry": {"radius": 1.0}}"#));
    assert_eq!(out.status.code(), Some(1));
    let out = ringdec(dir.path(), &["decohere"], Some("not json"));
    assert_eq!(out.status.code(), Some(1));
    let out = ringdec(dir.path(), &["frobnicate"], None);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn quadrature_failure_exits_with_two_and_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"geometry": {"r1": 1e-4, "delta": 2e-6}, "numerics": {"max_panels": 2, "rel_tol": 1e-12}, "times": {"count": 5}}"#;
    let out = ringdec(dir.path(), &["decohere"], Some(cfg));
    assert_eq!(out.status.code(), Some(2));
    let diag = read_json(&dir.path().join("out/error.json"));
    assert_eq!(diag["error"], "numerical");
    assert_eq!(diag["exit_code"], 2);
}

#[test]
fn delta_doubling_quadruples_saturation() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    ringdec(a.path(), &["saturation"], Some(r#"{"geometry": {"r1": 1e-4, "delta": 2e-6}}"#));
    ringdec(b.path(), &["saturation"], Some(r#"{"geometry": {"r1": 1e-4, "delta": 4e-6}}"#));
    let da = read_json(&a.path().join("out/saturation.json"));
    let db = read_json(&b.path().join("out/saturation.json"));
    let r = db["D_lim"]["D_lim"].as_f64().unwrap() / da["D_lim"]["D_lim"].as_f64().unwrap();
    assert!((r - 4.0).abs() < 1e-6, "{r}");
    let qa = da["quadrature"]["cutoff"]["mean"].as_f64().unwrap();
    let qb = db["quadrature"]["cutoff"]["mean"].as_f64().unwrap();
    assert!((qb / qa - 4.0).abs() < 1e-4, "{}", qb / qa);
}

#[test]
fn flags_override_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let out = ringdec(dir.path(), &["saturation", "--log-override"], None);
    assert_eq!(out.status.code(), Some(0));
    let sat = read_json(&dir.path().join("out/saturation.json"));
    assert_eq!(sat["D_lim"]["log_override"], Value::Bool(true));
    let out = ringdec(dir.path(), &["spectrum", "--ir-mode", "omega3"], Some(r#"{"geometry": {"r1": 1e-4, "delta": 2e-6}}"#));
    assert_eq!(out.status.code(), Some(0));
    let spec = read_json(&dir.path().join("out/spectrum.json"));
    assert_eq!(spec["ir_mode"], "omega3");
    let csv = fs::read_to_string(dir.path().join("out/spectrum.csv")).unwrap();
    assert!(csv.contains(",ir\n"));
}

#[test]
fn validate_default_config_is_green() {
    let dir = tempfile::tempdir().unwrap();
    let out = ringdec(dir.path(), &["validate"], None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let report = read_json(&dir.path().join("out/report.json"));
    assert_eq!(report["pass"], Value::Bool(true));
    assert!(report["checks"].as_array().unwrap().len() >= 20);
}
