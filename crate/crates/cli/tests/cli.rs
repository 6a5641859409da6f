use std::process::{Command, Output};

use serde_json::Value;

fn ssbscan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ssbscan"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn tx_then_search_recovers_the_cell() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cell.cf32");
    let p = path.to_str().unwrap();
    let tx = stdout_json(&ssbscan(&[
        "tx", "--pci", "502", "--gscn", "7712", "--frames", "1", "--out", p, "--delay", "777",
    ]));
    assert_eq!(tx["pci"], 502);
    assert!(dir.path().join("cell.cf32.json").exists());

    let ticks = dir.path().join("ticks.csv");
    let r = stdout_json(&ssbscan(&[
        "search",
        "--in",
        p,
        "--d-pss",
        "8",
        "--gscn-max",
        "7713",
        "--ticks",
        ticks.to_str().unwrap(),
    ]));
    assert_eq!(r["pci"], 502);
    assert_eq!(r["gscn"], 7712);
    assert_eq!(r["boundaries"]["frame_start_sample"], 777);
    let csv = std::fs::read_to_string(ticks).unwrap();
    assert!(csv.lines().count() > 10);
}

#[test]
fn domain_errors_are_json_on_stderr() {
    let out = ssbscan(&["tx", "--pci", "1008", "--out", "/nonexistent/x.cf32"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["kind"], "out_of_range");

    let out = ssbscan(&["search", "--in", "/nonexistent/x.cf32"]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(!err["error"].as_str().unwrap().is_empty());
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        &["frobnicate"][..],
        &["search", "--in", "x", "--mode", "fixed80_2"],
        &["dump"],
    ] {
        let out = ssbscan(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let err: Value = serde_json::from_slice(&out.stderr).unwrap();
        assert_eq!(err["kind"], "usage");
    }
    assert!(ssbscan(&["--help"]).status.success());
}

#[test]
fn dump_prints_sequences_and_grid() {
    let out = ssbscan(&["dump", "--pci", "0"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0].split(',').count(), 127);
    assert_eq!(lines[1].split(',').count(), 127);
    assert_eq!(lines[2].split(',').count(), 2 * 144);
    assert!(lines[0].starts_with("1,-1,-1,1"));

    let out = ssbscan(&["dump", "--pci", "7", "--ssb-index", "3", "--grid"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().count() >= 4);
}

#[test]
fn calibrate_and_sweep_run() {
    let cal = stdout_json(&ssbscan(&[
        "calibrate",
        "--trials",
        "100",
        "--d-pss",
        "14",
        "--target-fa",
        "0.05",
    ]));
    let t = cal["threshold"].as_f64().unwrap();
    assert!(t > 0.0 && t < 1.0);
    assert!(cal["false_alarms"].as_u64().unwrap() <= 5);

    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sweep.json");
    std::fs::write(
        &config,
        r#"{"snr_db_list":[0.0],"d_pss_list":[14],"numeric_modes":["float32"],"trials":4,"calibration_trials":100,"master_seed":9}"#,
    )
    .unwrap();
    let csv = dir.path().join("out.csv");
    let r = stdout_json(&ssbscan(&[
        "sweep",
        "--config",
        config.to_str().unwrap(),
        "--out",
        csv.to_str().unwrap(),
        "--threads",
        "1",
    ]));
    assert_eq!(r["records"], 1);
    let text = std::fs::read_to_string(csv).unwrap();
    assert!(text.starts_with("snr_db,d_pss,mode,trials,"));
    assert_eq!(text.lines().count(), 2);
}
