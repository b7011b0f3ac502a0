use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_monogenic"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(config: &Path, out: &Path, extra: &[&str]) -> Output {
    bin().arg("run").arg("--config").arg(config).arg("--out").arg(out).args(extra).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, text).unwrap();
    p
}

fn summary(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn list_generators() {
    let out = bin().arg("list-generators").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines, ["constant", "lift:newton-kernel", "lift:harmonic-polynomial", "poisson-extension"]);
}

#[test]
fn describe_area_shows_defaults() {
    let out = bin().args(["describe", "area"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for key in ["\"alpha\": 1.0", "\"h\": 1.0", "\"eps0\": 0.0"] {
        assert!(text.contains(key), "missing {key} in\n{text}");
    }
}

#[test]
fn describe_unknown_fails() {
    let out = bin().args(["describe", "nonsense"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("unknown experiment"));
}

#[test]
fn verify_constant_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&configs().join("verify_constant.json"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let csv = std::fs::read_to_string(dir.path().join("verify.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1001);
    for line in csv.lines().skip(1) {
        let residual: f64 = line.split(',').nth(8).unwrap().parse().unwrap();
        assert!(residual <= 1e-12);
    }
    let s = summary(dir.path());
    assert_eq!(s["seed"], 1);
    assert_eq!(s["config_sha256"].as_str().unwrap().len(), 64);
    assert_eq!(s["passed"], true);
}

#[test]
fn area_additivity_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&configs().join("area_additivity.json"), dir.path(), &["--budget-scale", "0.2"]);
    assert_eq!(out.status.code(), Some(0));
    let s = summary(dir.path());
    assert_eq!(s["budget_scale"], 0.2);
    let add = s["assertions"].as_array().unwrap().iter().find(|a| a["name"] == "additivity").unwrap();
    assert_eq!(add["passed"], true);
}

#[test]
fn herglotz_atom_is_infinite() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&configs().join("herglotz_atom.json"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0));
    let s = summary(dir.path());
    assert_eq!(s["extra"]["verdicts"][0]["infinite"], "infinite");
}

#[test]
fn failed_expectation_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"experiment": {"kind": "herglotz", "measure": {"densities": [{"kind": "uniform", "value": 1}]},
            "budget": 2000, "expect": {"infinite": true}}}"#,
    );
    let out = run(&cfg, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(summary(dir.path())["passed"], false);
}

#[test]
fn malformed_config_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "{\n  \"experiment\": {\"kind\": \"verify\"},\n  \"field\": [1, 2\n}");
    let out = run(&cfg, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("line 3 column 13"));
}

#[test]
fn unknown_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"field": {"terms": [{"kind": "constant", "value": [1,0,0,0,0,0,0,0]}]},
            "experiment": {"kind": "verify", "pointz": {}}}"#,
    );
    let out = run(&cfg, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("pointz"));
    assert!(!dir.path().join("summary.json").exists());
}

#[test]
fn domain_error_exits_one() {
    // Pole on the boundary at the cone vertex without a cutoff.
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"field": {"terms": [{"kind": "lift", "potential": {"kind": "newton-kernel", "pole": [0,0,0,0,0,0,0,0]}}]},
            "experiment": {"kind": "area", "vertices": [[0,0,0,0,0,0,0]], "quadrature": {"budget": 1000}}}"#,
    );
    let out = run(&cfg, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("singular"));
}

#[test]
fn reruns_are_byte_identical_and_seed_overrides() {
    let cfg = configs().join("subharmonic_lift.json");
    let (a, b, c) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        assert_eq!(run(&cfg, d.path(), &["--budget-scale", "0.1"]).status.code(), Some(0));
    }
    assert_eq!(run(&cfg, c.path(), &["--budget-scale", "0.1", "--seed", "99"]).status.code(), Some(0));
    let read = |d: &tempfile::TempDir| std::fs::read(d.path().join("subharmonic.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
    assert_eq!(std::fs::read(a.path().join("summary.json")).unwrap(), std::fs::read(b.path().join("summary.json")).unwrap());
    assert_eq!(summary(c.path())["seed"], 99);
}
