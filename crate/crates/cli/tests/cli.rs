use std::fs;
use std::process::Command;

fn aoisim() -> Command {
    Command::new(env!("CARGO_BIN_EXE_aoisim"))
}

const SMALL: &str = "num_subnetworks = 6\nhorizon_slots = 150\nnum_runs = 2\n";

#[test]
fn invalid_config_exits_nonzero_and_lists_every_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "num_rbs = 0\nslot_duration_s = -1.0\n").unwrap();
    let out = aoisim().args(["validate", "--config"]).arg(&cfg).output().unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("num_rbs") && err.contains("slot_duration_s"), "{err}");

    let out = aoisim().args(["run", "--config"]).arg(&cfg).arg("--out").arg(dir.path().join("o")).output().unwrap();
    assert!(!out.status.success());
    assert!(!dir.path().join("o/summary.csv").exists());
}

#[test]
fn unknown_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("typo.toml");
    fs::write(&cfg, "num_rb = 4\n").unwrap();
    let out = aoisim().args(["validate", "--config"]).arg(&cfg).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn bad_sweep_value_fails_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    fs::write(&cfg, SMALL).unwrap();
    let out = aoisim()
        .args(["run", "--sweep", "M=100,0", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("M=0"));
}

#[test]
fn sweep_writes_summary_ccdf_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    fs::write(&cfg, SMALL).unwrap();
    let out_dir = dir.path().join("o");
    let out = aoisim()
        .args(["run", "--policy", "default,greedy", "--sweep", "alpha_i=0,10", "--trace", "--seed", "3", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 4);

    let summary = fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(lines[0], "sweep_label,policy,sampling_rate_bps,M,alpha_i,violation_probability,avg_aoi_s,rmse_s");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("alpha_i=0,default,1000000,300,0,"));
    assert!(lines[1].ends_with(','), "default policy has no rmse: {}", lines[1]);
    assert!(!lines[2].ends_with(','));

    let ccdf = fs::read_to_string(out_dir.join("ccdf.csv")).unwrap();
    assert!(ccdf.starts_with("sweep_label,policy,threshold_s,ccdf\n"));
    assert_eq!(ccdf.lines().count(), 1 + 4 * 52);

    let trace = fs::read_to_string(out_dir.join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 1 + 4 * 2 * 150 * 6);
}

#[test]
fn print_config_round_trips() {
    let out = aoisim().arg("print-config").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let cfg = aoi_core::ScenarioConfig::from_toml_str(&text).unwrap();
    assert_eq!(cfg, aoi_core::ScenarioConfig::default());
}
