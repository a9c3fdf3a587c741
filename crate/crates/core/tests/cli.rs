use std::fs;
use std::process::{Command, Output};

use c2ucb_lab::cli::ROUND_CSV_COLUMNS;
use c2ucb_lab::env::{EnvConfig, Regime};
use c2ucb_lab::ledger::AUDIT_CSV_COLUMNS;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_c2ucb-lab"));
    c.env_remove("C2UCB_LAB_SEED");
    c
}

fn run(cmd: &mut Command) -> (i32, String, String) {
    let Output { status, stdout, stderr } = cmd.output().expect("binary runs");
    (
        status.code().expect("exit code"),
        String::from_utf8(stdout).unwrap(),
        String::from_utf8(stderr).unwrap(),
    )
}

#[test]
fn audit_text_and_json() {
    let (code, out, _) = run(bin().arg("audit"));
    assert_eq!(code, 0);
    assert!(out.contains("2.892") && out.contains("3.1346"));

    let (code, out, _) = run(bin().args(["audit", "--json"]));
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!((v["lhs"].as_f64().unwrap() - 2.892).abs() <= 1e-9);
    assert!((v["rhs"].as_f64().unwrap() - 3.1346).abs() <= 1e-9);

    let (again, _, _) = run(bin().args(["audit", "--json"]));
    assert_eq!(again, 0);
}

#[test]
fn corrupted_kernel_is_caught() {
    let (code, out, _) = run(bin().args(["audit", "--corrupt-kernel"]));
    assert_eq!(code, 2);
    assert!(out.contains("FAIL"));
}

#[test]
fn verify_small_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, err) = run(bin().args([
        "verify", "--trials", "40", "--d-range", "2..4", "--k-range", "1..3", "--n-range", "1..8", "--seed", "3",
        "--out",
    ]).arg(dir.path()));
    assert_eq!(code, 0, "{out}{err}");
    let mut lines = out.lines();
    assert_eq!(lines.next().unwrap(), "property,trials,passed,failed,skipped");
    assert!(out.contains("lemma1,40,40,0,0"));
    assert!(dir.path().join("summary.csv").exists());
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(json["summary"]["trials"], 40);
}

#[test]
fn verify_colinear_has_no_violations() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = run(bin().args(["verify", "--trials", "100", "--colinear-only", "--out"]).arg(dir.path()));
    assert_eq!(code, 0);
    assert!(out.contains("claim1 violations: 0 of 100"));
}

#[test]
fn replay_reproduces_failure() {
    let dir = tempfile::tempdir().unwrap();
    let replay = dir.path().join("replay.json");
    // Context norm above the unit cap makes every property fail.
    let instance = serde_json::json!({
        "trial": 0,
        "failed": ["lemma1"],
        "instance": {
            "label": "tampered",
            "v0": [[1.2, 0.0], [0.0, 1.2]],
            "k": 3,
            "rounds": [[[3.0, 0.0], [0.6, 0.1], [0.1, 0.5]]]
        }
    });
    fs::write(&replay, instance.to_string()).unwrap();
    let (first, out1, _) = run(bin().args(["verify", "--replay"]).arg(&replay));
    let (second, out2, _) = run(bin().args(["verify", "--replay"]).arg(&replay));
    assert_eq!(first, 2);
    assert_eq!(second, 2);
    assert_eq!(out1, out2);
}

#[test]
fn config_and_io_errors() {
    let (code, _, _) = run(bin().args(["verify", "--k-range", "4..1"]));
    assert_eq!(code, 3);
    let (code, _, _) = run(bin().args(["simulate", "--config", "/nonexistent/cfg.json", "--out", "/tmp/x"]));
    assert_eq!(code, 4);

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"d": 2, "m": 1, "k": 3, "n": 5, "regime": "generic"}"#).unwrap();
    let (code, _, _) = run(bin().args(["simulate", "--config"]).arg(&cfg).arg("--out").arg(dir.path().join("o")));
    assert_eq!(code, 3);

    let (code, _, _) = run(bin().args(["verify", "--trials", "2"]).env("C2UCB_LAB_SEED", "not-a-number"));
    assert_eq!(code, 3);
}

#[test]
fn simulate_outputs_and_seed_override() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = EnvConfig::new(3, 6, 2, 30, Regime::Generic, 1);
    cfg.noise_sigma = 0.2;
    let path = dir.path().join("cfg.json");
    fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();

    let out_a = dir.path().join("a");
    let (code, _, err) = run(bin().args(["simulate", "--svg", "--config"]).arg(&path).arg("--out").arg(&out_a));
    assert_eq!(code, 0, "{err}");
    let rounds = fs::read_to_string(out_a.join("rounds.csv")).unwrap();
    assert_eq!(rounds.lines().next().unwrap(), ROUND_CSV_COLUMNS.join(","));
    assert_eq!(rounds.lines().count(), 31);
    let audit = fs::read_to_string(out_a.join("audit.csv")).unwrap();
    assert_eq!(audit.lines().next().unwrap(), AUDIT_CSV_COLUMNS.join(","));
    let svg = fs::read_to_string(out_a.join("simulate.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<polyline"));

    let out_b = dir.path().join("b");
    let (code, _, _) = run(bin().args(["simulate", "--config"]).arg(&path).arg("--out").arg(&out_b));
    assert_eq!(code, 0);
    assert_eq!(rounds, fs::read_to_string(out_b.join("rounds.csv")).unwrap());
    assert!(!out_b.join("simulate.svg").exists());

    let out_c = dir.path().join("c");
    let (code, _, _) = run(bin()
        .args(["simulate", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(&out_c)
        .env("C2UCB_LAB_SEED", "2"));
    assert_eq!(code, 0);
    assert_ne!(rounds, fs::read_to_string(out_c.join("rounds.csv")).unwrap());
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_c.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["manifest"]["config"]["env"]["seed"], 2);
}

#[test]
fn counterexample_simulation_matches_audit() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    fs::write(&path, serde_json::to_string(&EnvConfig::counterexample()).unwrap()).unwrap();
    let out = dir.path().join("o");
    let (code, _, _) = run(bin().args(["simulate", "--config"]).arg(&path).arg("--out").arg(&out));
    assert_eq!(code, 0);
    let audit = fs::read_to_string(out.join("audit.csv")).unwrap();
    let row: Vec<&str> = audit.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(&row[..4], &["1", "1.00833333", "2.17680556", "2"]);
}
