use std::path::PathBuf;
use std::process::{Command, Output};

use sleeping_mis::record::RunRecord;

fn smis(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smis")).args(args).env_remove("SMIS_OUT_DIR").output().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("smis-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn run_prints_one_independent_record() {
    let o = smis(&["run", "--alg", "1", "--model", "gnp", "--n", "1024", "--avg-deg", "16", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 1);
    let r: RunRecord = serde_json::from_str(text.trim()).unwrap();
    assert!(r.independent);
    assert_eq!((r.n, r.seed, r.algorithm.as_str()), (1024, 1, "alg1"));
}

#[test]
fn run_flags() {
    let o = smis(&["run", "--alg", "2", "--avg-energy", "--n", "500", "--avg-deg", "10", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let r: RunRecord = serde_json::from_slice(&o.stdout).unwrap();
    assert!(r.avg_energy && r.maximal);
    for phase in ["1", "2", "3"] {
        let o = smis(&["run", "--alg", "1", "--phase", phase, "--n", "300", "--avg-deg", "6"]);
        assert_eq!(o.status.code(), Some(0), "phase {phase}");
        let r: RunRecord = serde_json::from_slice(&o.stdout).unwrap();
        assert!(r.independent);
        assert_eq!(r.algorithm, format!("alg1/phase{phase}"));
    }
}

#[test]
fn verify_schedules_passes() {
    let o = smis(&["verify", "--schedules", "--max-t", "4096"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn verify_oracle_small() {
    let o = smis(&["verify", "--oracle", "--max-n", "4", "--seeds", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 8);
}

#[test]
fn empty_report_is_a_header() {
    let d = scratch("empty");
    let empty = d.join("empty.jsonl");
    std::fs::write(&empty, "").unwrap();
    let o = smis(&["report", empty.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 1);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["frobnicate"][..],
        &["run", "--alg", "3", "--n", "10"],
        &["run", "--alg", "1"],
        &["run", "--alg", "1", "--n", "10", "--set", "unknown=1"],
        &["run", "--alg", "1", "--n", "10", "--model", "regular"],
        &["report", "/nonexistent/records.jsonl"],
        &["sweep", "--n", "64", "--seeds", "0"],
    ] {
        assert_eq!(smis(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn budget_breach_exits_one() {
    // one bit per message cannot carry the protocol's messages
    let o = smis(&["run", "--alg", "1", "--n", "200", "--avg-deg", "8", "--set", "budget_factor=0"]);
    assert_eq!(o.status.code(), Some(1));
    let o = smis(&[
        "run", "--alg", "1", "--n", "200", "--avg-deg", "8", "--set", "budget_factor=0", "--set",
        "mode=record_and_continue",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8(o.stderr).unwrap().contains("\"budget_violations\""));
}

#[test]
fn generate_sweep_report_round_trip() {
    let d = scratch("trip");
    let g = d.join("g.txt");
    let o = smis(&["generate", "--n", "256", "--avg-deg", "5", "--seed", "2", "--out", g.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let header = std::fs::read_to_string(&g).unwrap();
    assert!(header.starts_with("256 "));
    let o = smis(&["run", "--alg", "2", "--graph", g.to_str().unwrap(), "--seed", "2"]);
    assert_eq!(o.status.code(), Some(0));

    let out = Command::new(env!("CARGO_BIN_EXE_smis"))
        .args(["sweep", "--n", "128,256,512", "--avg-deg", "4", "--seeds", "2", "--alg", "1", "--jobs", "2"])
        .env("SMIS_OUT_DIR", &d)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let lines = std::fs::read_to_string(d.join("sweep.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), 6);

    let fits = d.join("fits.csv");
    let o = smis(&["report", d.join("sweep.jsonl").to_str().unwrap(), "--fits", fits.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 4);
    assert!(std::fs::read_to_string(&fits).unwrap().lines().count() > 1);
}
