use std::fs;
use std::process::{Command, Output};

fn trotterlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trotterlab")).args(args).output().unwrap()
}

#[test]
fn passing_run_writes_files_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = trotterlab(&["matrix-bch", "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "matrix-bch: pass");
    assert!(dir.path().join("matrix-bch_t1.csv").is_file());
    let summary = fs::read_to_string(dir.path().join("matrix-bch_summary.json")).unwrap();
    assert!(summary.contains("\"verdict\": \"pass\""));
}

#[test]
fn json_format_and_seed_flag() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = trotterlab(&["chernoff", "--out", out, "--format", "json", "--seed", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("chernoff_t1.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["experiment"], "chernoff");
    let summary = fs::read_to_string(dir.path().join("chernoff_summary.json")).unwrap();
    assert!(summary.contains("\"seed\": 5"));
}

#[test]
fn failing_criterion_exits_one_and_names_check() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"t_values":[1.0],"n_values":[4,8],"tolerances":{"harmonic.slope_max":-3.0}}"#).unwrap();
    let o = trotterlab(&["harmonic-rate", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("failed harmonic-rate: slope"), "{err}");
    // results are still written
    assert!(dir.path().join("harmonic-rate_t1.csv").is_file());
}

#[test]
fn bad_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"n_values":[8,4]}"#).unwrap();
    let o = trotterlab(&["all", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("n_values must be strictly increasing"));

    fs::write(&cfg, r#"{"colour":1}"#).unwrap();
    let o = trotterlab(&["all", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown configuration key 'colour'"));
}

#[test]
fn zero_threads_rejected_by_parser() {
    let o = trotterlab(&["unitary", "--threads", "0"]);
    assert_eq!(o.status.code(), Some(2));
}
