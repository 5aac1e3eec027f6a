//! The `hidm` binary: exit codes, output files and determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hidm::scenario::{parse_config, run_scenario};

fn hidm(args: &[&str], seed: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_hidm"));
    cmd.args(args).env_remove("HIDM_SEED");
    if let Some(s) = seed {
        cmd.env("HIDM_SEED", s);
    }
    cmd.output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hidm-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn config_errors_exit_with_two() {
    let dir = scratch("config");
    for body in ["{\"patients\": 2, \"unknown\": true}", "{\"patients\": 0}", "not json"] {
        let config = write_config(&dir, body);
        let out = hidm(&["run", "--config", &config], None);
        assert_eq!(out.status.code(), Some(2), "{body}");
    }
    let missing = dir.join("absent.json");
    assert_eq!(hidm(&["run", "--config", missing.to_str().unwrap()], None).status.code(), Some(2));
    assert_eq!(hidm(&["bench", "--scheme", "RSA", "--scenario", "5"], None).status.code(), Some(2));
    assert_eq!(hidm(&["bench", "--scenario", "9"], None).status.code(), Some(2));
    assert_eq!(hidm(&["attack", "--kind", "teleport"], None).status.code(), Some(2));
    assert_eq!(hidm(&["vectors", "emit"], Some("minus-one")).status.code(), Some(2));
}

#[test]
fn run_writes_outputs_and_ledgers_verify() {
    let dir = scratch("run");
    let config = write_config(&dir, "{\"patients\": 2, \"visits\": 2, \"seed\": 4}");
    let out_dir = dir.join("out");
    let out = hidm(&["run", "--config", &config, "--out", out_dir.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["completed_visits"], 4);
    assert_eq!(summary["ledgers_intact"], true);
    for f in ["transcript.json", "report.json", "summary.json"] {
        assert!(out_dir.join(f).exists(), "{f}");
    }

    let audit = out_dir.join("ledgers/audit.jsonl");
    assert_eq!(hidm(&["ledger", "verify", audit.to_str().unwrap()], None).status.code(), Some(0));
    let mut bytes = std::fs::read(&audit).unwrap();
    bytes[10] ^= 0x01;
    std::fs::write(&audit, &bytes).unwrap();
    let out = hidm(&["ledger", "verify", audit.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("audit.jsonl"));
}

#[test]
fn vectors_are_deterministic_per_seed() {
    let a = hidm(&["vectors", "emit"], Some("11"));
    let b = hidm(&["vectors", "emit"], Some("11"));
    let c = hidm(&["vectors", "emit"], Some("12"));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    for key in ["schnorr", "pbs", "rsa", "patient_credentials", "pre", "pbp", "pseudonym_token", "appointment_token", "ibs", "ledger"] {
        assert!(!v[key].is_null(), "{key}");
    }
}

#[test]
fn same_seed_same_transcript_from_the_cli() {
    let dir = scratch("transcript");
    let config = write_config(&dir, "{\"patients\": 1, \"visits\": 1}");
    let mut transcripts = Vec::new();
    for run in ["a", "b"] {
        let out_dir = dir.join(run);
        let out = hidm(&["run", "--config", &config, "--out", out_dir.to_str().unwrap()], Some("77"));
        assert_eq!(out.status.code(), Some(0));
        transcripts.push(std::fs::read(out_dir.join("transcript.json")).unwrap());
    }
    assert_eq!(transcripts[0], transcripts[1]);
}

#[test]
fn single_attack_and_bench_cell() {
    let out = hidm(&["attack", "--kind", "replay-ati"], Some("3"));
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("PASS replay-ati"));

    let dir = scratch("bench");
    let report = dir.join("report.json");
    let out = hidm(
        &["bench", "--scheme", "CL-pairing", "--scenario", "5", "--out", report.to_str().unwrap()],
        Some("3"),
    );
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["scenario"], "appointment-booking");
    assert_eq!(rows[0]["samples_ms"].as_array().unwrap().len(), 12);
}

#[test]
fn rotation_off_reuses_one_pseudonym() {
    let config = parse_config("{\"patients\": 1, \"visits\": 2, \"hos\": 1, \"rotation\": false, \"seed\": 8}").unwrap();
    let (summary, report) = run_scenario(config, None).unwrap();
    assert_eq!(summary.completed_visits, 2);
    let visits = &report.patients[0].visits;
    assert_eq!(visits[0].pseudonym, visits[1].pseudonym);
    assert_eq!(visits[1].read, vec![visits[0].written.clone()]);
}
