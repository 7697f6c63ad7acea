use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn tmsel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tmsel")).args(args).output().expect("spawn tmsel")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn simulate_writes_mc_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("mse.csv");
    let o = tmsel(&["simulate", "--scenario", "proxy", "--runs", "10", "--s-grid", "0,0.5", "--out", p(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("scenario,s,method,metric,value,mc_se,runs,seed"));
    assert_eq!(lines.count(), 6);
}

#[test]
fn usage_errors_exit_one() {
    let o = tmsel(&["select", "--scenario", "bogus", "--input", "x.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(tmsel(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(tmsel(&["--help"]).status.code(), Some(0));
}

#[test]
fn runtime_errors_exit_two() {
    let o = tmsel(&["select", "--scenario", "obs", "--input", "/nonexistent/data.csv"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn select_marks_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("obs.csv");
    let reps = dir.path().join("reps.csv");
    assert!(tmsel(&["generate", "--scenario", "obs", "--s", "0.1", "--seed", "5", "--out", p(&data)]).status.success());
    let o = tmsel(&["select", "--scenario", "obs", "--input", p(&data), "--boot-ci", "200", "--dump-replicates", p(&reps)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = String::from_utf8(o.stdout).unwrap();
    assert_eq!(table.lines().count(), 12);
    assert_eq!(table.lines().skip(1).filter(|l| l.ends_with(",1")).count(), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("interval level=0.95"));
    assert_eq!(fs::read_to_string(&reps).unwrap().lines().count(), 1 + 200 * 11);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    fs::write(&cfg, "# defaults\nscenario = proxy\nruns = 5\ns_grid = 0\nmethods = baseline\n").unwrap();
    assert!(tmsel(&["--config", p(&cfg), "simulate", "--out", p(&a)]).status.success());
    assert!(tmsel(&["--config", p(&cfg), "simulate", "--runs", "7", "--out", p(&b)]).status.success());
    let a = fs::read_to_string(a).unwrap();
    let b = fs::read_to_string(b).unwrap();
    assert!(a.lines().nth(1).unwrap().ends_with(",5,0"), "{a}");
    assert!(b.lines().nth(1).unwrap().ends_with(",7,0"), "{b}");
}

#[test]
fn simulate_then_plot() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("mse.csv");
    let svg = dir.path().join("mse.svg");
    assert!(tmsel(&["simulate", "--scenario", "proxy", "--runs", "8", "--out", p(&csv)]).status.success());
    let o = tmsel(&["plot", "--input", p(&csv), "--metric", "mse", "--title", "proxy", "--out", p(&svg)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<?xml"));
    assert_eq!(text.matches("<polyline").count(), 3);
}

#[test]
fn worker_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for w in ["1", "3"] {
        let out = dir.path().join(format!("w{w}.csv"));
        let o = tmsel(&[
            "coverage", "--scenario", "obs", "--runs", "6", "--boot-ci", "100", "--s-grid", "0,0.3", "--seed", "9",
            "--workers", w, "--out", p(&out),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push(fs::read(out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}
