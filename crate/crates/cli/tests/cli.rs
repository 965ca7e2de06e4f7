use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_xy-magnon"));
    c.env_remove("XY_MAGNON_OUT");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Last stdout line of `simulate` is the run directory.
fn run_dir(o: &Output) -> PathBuf {
    PathBuf::from(stdout(o).lines().last().expect("run dir printed").trim())
}

fn out_flag(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

#[test]
fn profile_prints_json() {
    let o = run(&["profile", "-N", "100", "--r0", "full"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["diagonal"], 25.0);
    assert_eq!(v["sites"], 100);
    assert_eq!(v["hoppings"].as_array().unwrap().len(), 25);
}

#[test]
fn profile_to_file() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("p.json");
    let o = run(&["profile", "-N", "12", "--r0", "5", "--sign", "paper-printed", "--topology", "chain", "--output", path.to_str().unwrap()]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(v["topology"], "open-chain");
    assert_eq!(v["sign"], "paper-printed");
    assert!(v["hoppings"][0][1].as_f64().unwrap() > 0.0);
}

#[test]
fn profile_rejects_odd_sites() {
    let o = run(&["profile", "-N", "101", "--r0", "full"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("N must be even"), "{err}");
    assert_eq!(err.trim().lines().count(), 1);
}

#[test]
fn profile_rejects_long_truncation() {
    let o = run(&["profile", "-N", "100", "--r0", "60"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("r0 exceeds N/2"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["profile"]).status.code(), Some(2));
    let o = run(&["simulate", "-N", "10", "--initial", "delta:3", "--observe", "entropy"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["simulate", "-N", "10", "--initial", "delta:30", "--observe", "probability", "--output", "/tmp/unused-xy"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_heatmap() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&[
        "simulate", "--topology", "ring", "-N", "100", "--initial", "delta:50", "--times", "0:6.2832:0.0157",
        "--observe", "probability", "--output", &out_flag(tmp.path()),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("PASS fft-vs-spectral"));
    let dir = run_dir(&o);
    assert!(dir.starts_with(tmp.path().join("simulate")));
    let csv = fs::read_to_string(dir.join("data.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,probability,site"));
    assert_eq!(lines.count(), 401 * 100);
    assert!(dir.join("manifest.json").is_file());
}

#[test]
fn simulate_autocorrelation_two_columns() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&[
        "simulate", "-N", "64", "--initial", "gaussian:32:0.3", "--observe", "autocorrelation", "--times",
        "0:6.283185307179586:0.1", "--output", &out_flag(tmp.path()),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(run_dir(&o).join("data.csv")).unwrap();
    for line in csv.lines() {
        assert_eq!(line.split(',').count(), 2);
    }
    assert_eq!(csv.lines().next(), Some("t,autocorrelation"));
}

#[test]
fn simulate_open_chain_concurrence() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&[
        "simulate", "--topology", "chain", "-N", "1000", "--r0", "30", "--initial", "delta:500", "--times",
        "0:3:0.5", "--observe", "concurrence:100:900", "--output", &out_flag(tmp.path()),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(run_dir(&o).join("data.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("t,concurrence,concurrence_symmetrized,i_site,j_site"));
    assert_eq!(csv.lines().count(), 1 + 7);
    assert!(csv.lines().nth(1).unwrap().ends_with(",100,900"));
}

#[test]
fn manifest_replay_reproduces_run() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&[
        "simulate", "-N", "40", "--r0", "full,9", "--initial", "symmetric:20:even:0.5,0.5,0.5", "--observe",
        "profile:20", "--observe", "autocorrelation", "--times", "0:2:0.25", "--seed", "17", "--output",
        &out_flag(tmp.path()),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let dir = run_dir(&o);
    let first = fs::read(dir.join("data.csv")).unwrap();
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["spec"]["seed"], 17);
    assert_eq!(manifest["profile"].as_array().unwrap().len(), 2);

    let other = tempfile::tempdir().unwrap();
    let o = run(&[
        "simulate", "--from-manifest", dir.join("manifest.json").to_str().unwrap(), "--output", &out_flag(other.path()),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let replay = run_dir(&o);
    assert_eq!(replay.file_name(), dir.file_name());
    assert_eq!(fs::read(replay.join("data.csv")).unwrap(), first);
    assert_eq!(fs::read(replay.join("data-autocorrelation.csv")).unwrap(), fs::read(dir.join("data-autocorrelation.csv")).unwrap());
}

#[test]
fn json_format_and_env_output_dir() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bin()
        .env("XY_MAGNON_OUT", tmp.path())
        .args(["simulate", "-N", "16", "--initial", "delta:0", "--observe", "autocorrelation", "--times", "0:1:0.5", "--format", "json", "--no-crosscheck"])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let dir = run_dir(&o);
    assert!(dir.starts_with(tmp.path()));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("data.json")).unwrap()).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
    assert!(!stderr(&o).contains("fft-vs-spectral"));
}

#[test]
fn reproduce_timing_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["reproduce", "timing", "-N", "1000", "-j", "100", "--output", &out_flag(tmp.path())]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.contains("PASS C(j=100, t0)"));
    assert!(text.contains("PASS C(j=100, t1)"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn reproduce_reports_failures_with_exit_4() {
    // the N = 100 full ring recurs to 0.971 at t = 2π, short of 0.98
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["reproduce", "fig3", "--output", &out_flag(tmp.path())]);
    assert_eq!(o.status.code(), Some(4));
    let text = stdout(&o);
    assert!(text.contains("PASS right ridge slope"));
    assert!(text.contains("FAIL P(N_A, 2pi)"));
    let dir = tmp.path().join("delta-heatmap");
    assert_eq!(fs::read_dir(dir).unwrap().count(), 1);
}

#[test]
fn reproduce_fig4_small() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["reproduce", "fig4", "--output", &out_flag(tmp.path())]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS branch width drift"));
}
