use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const MODEL: &str = r#"{"kind":"transcritical","mu":0.01,"D_v":[[1.0]],"K":[[1.0]]}"#;

fn front_lab(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_front-lab"));
    cmd.args(args);
    if let Some(n) = threads {
        cmd.env("FRONTLAB_THREADS", n);
    }
    cmd.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn usage_errors_exit_3() {
    assert_eq!(code(&front_lab(&["frobnicate"], None)), 3);
    assert_eq!(code(&front_lab(&["verify", "m.json"], None)), 3, "missing --delta");
    assert_eq!(code(&front_lab(&["--help"], None)), 0);
    let o = front_lab(&["analyze", "/definitely/not/here.json"], None);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("not/here.json"));
}

#[test]
fn invalid_model_is_fail() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "bad.json", r#"{"kind":"transcritical","mu":0.01,"D_v":[[1.0]],"K":[[0.0]]}"#);
    let out = dir.path().join("v.json");
    let o = front_lab(&["verify", s(&m), "--delta", "0.1", "--out", s(&out)], None);
    assert_eq!(code(&o), 1);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v["validation"]["status"], "FAIL");
    assert_eq!(v["schema_version"], "1.0");
}

#[test]
fn malformed_model_json_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.json", "{\"kind\": ");
    assert_eq!(code(&front_lab(&["wave", s(&m)], None)), 3);
}

#[test]
fn analyze_and_wave_pass() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.json", MODEL);
    let an = dir.path().join("an.json");
    assert_eq!(code(&front_lab(&["analyze", s(&m), "--out", s(&an)], None)), 0);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&an).unwrap()).unwrap();
    assert_eq!(v["hyp1"]["c_star"].as_f64().unwrap(), 2.0);
    assert!(dir.path().join("an.curve.csv").exists());

    let prof = dir.path().join("profile.csv");
    assert_eq!(code(&front_lab(&["wave", s(&m), "--delta", "0.1", "--out", s(&prof)], None)), 0);
    let t: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("profile.json")).unwrap()).unwrap();
    assert!((t["nu_star"].as_f64().unwrap() + 1.0).abs() < 1e-3);
    assert!(std::fs::read_to_string(prof).unwrap().starts_with("xi,Q_1,Q_2\n"));
}

#[test]
fn report_on_nothing_is_empty_and_versioned() {
    let o = front_lab(&["report"], None);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["schema_version"], "1.0");
    assert_eq!(v["artifacts"].as_array().unwrap().len(), 0);
}

#[test]
fn corrupted_csv_is_reported_with_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let c = write(dir.path(), "run.csv", "t,sigma,c_inst,weighted_error\n0,1,2,\n1,2,oops,\n");
    let o = front_lab(&["report", s(&c)], None);
    assert_eq!(code(&o), 3);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3") && err.contains("run.csv"), "{err}");
}

#[test]
fn simulate_writes_series_sidecar_and_links_in_report() {
    let dir = tempfile::tempdir().unwrap();
    // small domain so the run is quick
    let model = r#"{"kind":"transcritical","mu":0.01,"D_v":[[1.0]],"K":[[1.0]],
        "numerics":{"sim_x_min":-60.0,"sim_x_max":140.0}}"#;
    let m = write(dir.path(), "m.json", model);
    let run = dir.path().join("run.csv");
    let o = front_lab(&["simulate", s(&m), "--delta", "0.1", "--T", "20", "--out", s(&run), "--emit-snapshots", "10"], None);
    assert!(matches!(code(&o), 0 | 2), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&run).unwrap();
    assert!(csv.starts_with("t,sigma,c_inst,weighted_error\n"));
    assert_eq!(csv.lines().count(), 22);
    assert!(dir.path().join("run.snap0002.csv").exists());
    let side = dir.path().join("run.json");
    let o = front_lab(&["report", s(&side), s(&run)], None);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["artifacts"][0]["kind"], "simulation");
    assert_eq!(v["references"].as_array().unwrap().len(), 1);
}

#[test]
fn verify_is_deterministic_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.json", MODEL);
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let oa = front_lab(&["verify", s(&m), "--delta", "0.1", "--out", s(&a)], Some("1"));
    let ob = front_lab(&["verify", s(&m), "--delta", "0.1", "--out", s(&b)], Some("3"));
    assert_eq!(code(&oa), 0, "{}", String::from_utf8_lossy(&oa.stderr));
    assert_eq!(code(&ob), 0);
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}
