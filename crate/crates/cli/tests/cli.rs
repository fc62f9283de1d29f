use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn gensync(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gensync")).args(args).output().expect("spawn")
}

fn cfg(name: &str) -> String {
    configs().join(name).to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn run_writes_summary_and_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_string_lossy().into_owned();
    let o = gensync(&["run", "--config", &cfg("reference_d0125.json"), "--out", &out, "--horizon", "200", "--svg"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("connected = true"), "{text}");
    assert!(text.contains("bounds.c = 10.37963"), "{text}");
    let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,"));
    assert!(std::fs::read_to_string(dir.path().join("trajectory.svg")).unwrap().starts_with("<svg"));
    assert!(dir.path().join("summary.txt").exists());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let out = d.path().to_string_lossy().into_owned();
        let o = gensync(&["run", "--config", &cfg("reference_d025.json"), "--out", &out, "--horizon", "60"]);
        assert!(o.status.success());
    }
    let read = |d: &tempfile::TempDir| std::fs::read(d.path().join("trajectory.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn bounds_prints_table() {
    let o = gensync(&["bounds", "--config", &cfg("reference_d0125.json")]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("lambda = 0.02655"));
    assert_eq!(text.lines().filter(|l| l.starts_with("table d = ")).count(), 3);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    let mut v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(cfg("reference_d0125.json")).unwrap()).unwrap();
    v["sim"]["horizon"] = serde_json::json!(0.0);
    std::fs::write(&bad, v.to_string()).unwrap();
    let o = gensync(&["bounds", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sim.horizon"));

    let o = gensync(&["run", "--config", &cfg("reference_d0125.json"), "--dt", "-1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_file_is_an_io_error() {
    let o = gensync(&["bounds", "--config", "/nonexistent/scenario.json"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn empty_sweep_grid_is_rejected() {
    let o = gensync(&["sweep", "--config", &cfg("reference_d0125.json"), "--ks", "", "--ds", "0.1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = gensync(&["sweep", "--config", &cfg("reference_d0125.json"), "--ks", "0.01", "--ds", "abc"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_accepts_pi_multiples() {
    let o = gensync(&[
        "sweep", "--config", &cfg("reference_d0125.json"), "--ks", "0.01", "--ds", "0.125pi,0.5pi", "--horizon", "100",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().nth(2).unwrap().starts_with("0.01,1.5707963267948966,"));
}

#[test]
fn validate_reduction_passes_with_random_probes() {
    let o = gensync(&["validate-reduction", "--config", &cfg("high_order_default.json"), "--seed", "7", "--probes", "3"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).lines().any(|l| l == "pass=true"));
}
