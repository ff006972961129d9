use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conformal-sorter")).args(args).output().unwrap()
}

fn stderr_record(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().last().unwrap_or_else(|| panic!("no stderr"));
    serde_json::from_str(line).unwrap_or_else(|e| panic!("{e}: {line}"))
}

fn empty_config(dir: &Path) -> String {
    let p = dir.join("empty.cfg");
    std::fs::write(&p, "").unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn verify_on_defaults_passes_and_reports_every_invariant() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = empty_config(tmp.path());
    let out = tmp.path().join("out");
    let res = run(&["verify", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let report = std::fs::read_to_string(out.join("report.jsonl")).unwrap();
    let records: Vec<serde_json::Value> = report.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(records.len() >= 30);
    for r in &records {
        assert!(r["name"].is_string() && r["measured"].is_number() && r["threshold"].is_array());
        assert_eq!(r["pass"], true, "{r}");
    }
    let manifest = std::fs::read_to_string(out.join("manifest.txt")).unwrap();
    for name in ["config.cfg", "report.jsonl", "residuals.csv"] {
        assert!(manifest.lines().any(|l| l.ends_with(name)), "{manifest}");
    }
}

#[test]
fn failed_invariant_exits_1_with_json_record() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = empty_config(tmp.path());
    let out = tmp.path().join("out");
    // far too coarse for second-order convergence to show
    let res = run(&["verify", "--config", &cfg, "--out", out.to_str().unwrap(), "--override", "grid.nx=32"]);
    assert_eq!(res.status.code(), Some(1));
    let rec = stderr_record(&res);
    assert_eq!(rec["error"], "invariant");
    assert!(!rec["failed"].as_array().unwrap().is_empty());
    assert!(out.join("manifest.txt").exists());
}

#[test]
fn config_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = empty_config(tmp.path());
    let out = tmp.path().join("out");
    let out = out.to_str().unwrap();

    let res = run(&["verify", "--config", &cfg, "--out", out, "--override", "transform.n=0"]);
    assert_eq!(res.status.code(), Some(2));
    assert_eq!(stderr_record(&res)["error"], "config");

    let bad = tmp.path().join("bad.cfg");
    std::fs::write(&bad, "grid.nx = 64\nwhat = 1\n").unwrap();
    let res = run(&["verify", "--config", bad.to_str().unwrap(), "--out", out]);
    assert_eq!(res.status.code(), Some(2));
    assert!(stderr_record(&res)["message"].as_str().unwrap().contains("line 2"));

    // sorting condition: the n = +1 sorter cannot sort m = 2
    let res = run(&["fig3-dipole", "--config", &cfg, "--out", out, "--override", "input.m=2"]);
    assert_eq!(res.status.code(), Some(2));
    assert_eq!(stderr_record(&res)["error"], "parameter");

    let mismatch = tmp.path().join("mismatch.cfg");
    std::fs::write(&mismatch, "scenario = fig1-sector\n").unwrap();
    let res = run(&["verify", "--config", mismatch.to_str().unwrap(), "--out", out]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn io_errors_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = empty_config(tmp.path());
    let res = run(&["verify", "--config", tmp.path().join("missing.cfg").to_str().unwrap(), "--out", "x"]);
    assert_eq!(res.status.code(), Some(3));
    assert_eq!(stderr_record(&res)["error"], "io");

    let under_file = Path::new(&cfg).join("out");
    let res = run(&["verify", "--config", &cfg, "--out", under_file.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(3));
    assert!(stderr_record(&res)["message"].as_str().unwrap().contains("empty.cfg"));
}

#[test]
fn output_dir_can_come_from_the_config() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("from-config");
    let cfg = tmp.path().join("c.cfg");
    std::fs::write(&cfg, format!("output.dir = {}\ngrid.nx = 64\n", out.display())).unwrap();
    let res = run(&["verify", "--config", cfg.to_str().unwrap()]);
    assert!(res.status.code() == Some(0) || res.status.code() == Some(1));
    assert!(out.join("manifest.txt").exists());
}
