use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn kloost(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kloost")).args(args).output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn eval_both_routes_agree() {
    let v = json_of(&kloost(&["eval", "kloosterman", "--q", "45", "--m", "7", "--n", "-3", "--both"]));
    assert!(v["difference"].as_f64().unwrap() < 1e-9);
    assert!(v["fast"]["im"].as_f64().unwrap().abs() < 1e-9);
    let v = json_of(&kloost(&["eval", "t", "--q", "49", "--x", "2", "--y", "5", "--z", "3", "--both"]));
    assert!(v["difference"].as_f64().unwrap() < 1e-9);
}

#[test]
fn eval_ramanujan_is_integer() {
    let v = json_of(&kloost(&["eval", "ramanujan", "--q", "12", "--m", "0", "--both"]));
    assert_eq!(v["fast"]["re"].as_f64().unwrap(), 4.0);
    assert!(v["difference"].as_f64().unwrap() < 1e-9);
}

#[test]
fn bad_modulus_is_an_error() {
    let out = kloost(&["eval", "kloosterman", "--q", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("modulus"));
}

#[test]
fn count_matches_brute() {
    let v = json_of(&kloost(&["count", "j", "--q", "97", "--a", "5", "--k", "30", "--brute"]));
    assert_eq!(v["count"], v["brute"]);
}

#[test]
fn suite_passes_and_catches_fault() {
    let ok = kloost(&["suite", "--budget", "30", "--module", "expsums"]);
    assert!(ok.status.success());
    let bad = kloost(&["suite", "--budget", "30", "--module", "expsums", "--inject-fault"]);
    assert_eq!(bad.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&bad.stdout).unwrap();
    assert_eq!(v["passed"], false);
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn calibrate_then_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let cal = dir.path().join("cal.json");
    let cal_s = cal.to_str().unwrap();
    let out = kloost(&["calibrate", "--target", "lemma-a2", "--cap", "60", "--date", "2026-01-01", "--file", cal_s]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stored: Value = serde_json::from_str(&std::fs::read_to_string(&cal).unwrap()).unwrap();
    assert_eq!(stored["entries"]["lemma-a2"]["date"], "2026-01-01");

    let cfg = dir.path().join("sweep.toml");
    write(&cfg, "target = [\"lemma-a2\", \"weil\"]\n[grid]\nmoduli = [91, 125]\nprimes_near = [300]\n");
    let reports = dir.path().join("out");
    let run = |workers: &str| {
        kloost(&[
            "sweep",
            "--config",
            cfg.to_str().unwrap(),
            "--calibration",
            cal_s,
            "--out",
            reports.to_str().unwrap(),
            "--workers",
            workers,
        ])
    };
    assert!(run("1").status.success());
    let csv1 = std::fs::read(reports.join("sweep.csv")).unwrap();
    let json1 = std::fs::read(reports.join("sweep.json")).unwrap();
    assert!(run("3").status.success());
    assert_eq!(csv1, std::fs::read(reports.join("sweep.csv")).unwrap());
    assert_eq!(json1, std::fs::read(reports.join("sweep.json")).unwrap());
}

#[test]
fn sweep_without_calibration_names_target() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    write(&cfg, "target = \"thm2.1a\"\n[grid]\nmoduli = [101]\n");
    let out = kloost(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--calibration",
        dir.path().join("none.json").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("thm2.1a"));
}

#[test]
fn moments_and_divisor_run() {
    let v = json_of(&kloost(&["moments", "--p-min", "97", "--p-max", "113", "--r", "2"]));
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r["moment"].as_f64().unwrap() > 0.0));
    let v = json_of(&kloost(&["divisor", "--x", "5000", "--q", "101", "--a", "3"]));
    assert!(v["sum"].as_u64().unwrap() > 0);
}
