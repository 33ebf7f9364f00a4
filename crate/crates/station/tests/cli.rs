use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const SG: &str = env!("CARGO_BIN_EXE_sg");

fn sg(args: &[&str]) -> Output {
    Command::new(SG).args(args).output().expect("run sg")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn fly(dir: &Path, persona: &str, seed: u64) -> String {
    let out = dir.join(format!("{persona}-{seed}.jsonl"));
    let out = out.to_str().unwrap().to_string();
    let o = sg(&[
        "fly",
        "-q",
        "--persona",
        persona,
        "--seed",
        &seed.to_string(),
        "-o",
        &out,
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    out
}

#[test]
fn persona_and_env_listing() {
    let o = sg(&["persona", "list"]);
    assert_eq!(code(&o), 0);
    let listed = String::from_utf8(o.stdout).unwrap();
    for p in [
        "gentle-cloud",
        "eager-companion",
        "cautious-observer",
        "indifferent-explorer",
    ] {
        assert!(listed.contains(p), "{p} missing from {listed}");
    }
    let o = sg(&["persona", "show", "gentle-cloud"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8(o.stdout)
        .unwrap()
        .contains("Ready to explore"));
    assert_eq!(code(&sg(&["env", "check", "corridor"])), 0);
    assert_eq!(code(&sg(&["env", "list"])), 0);
}

#[test]
fn config_errors_exit_2() {
    let o = sg(&["fly", "--persona", "/nonexistent/p.toml"]);
    assert_eq!(code(&o), 2);
    assert!(
        stderr(&o).starts_with("error[ConfigNotFound]"),
        "{}",
        stderr(&o)
    );

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "id = 'x'\nvoice = 12\n").unwrap();
    let o = sg(&["persona", "check", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(
        stderr(&o).starts_with("error[ConfigInvalid]"),
        "{}",
        stderr(&o)
    );

    assert_eq!(code(&sg(&["fly", "--mode", "orbit"])), 2);
    let o = sg(&["fly", "--persona", "gentle-cloud", "--env", "moon"]);
    assert_eq!(code(&o), 2);
    assert!(
        stderr(&o).starts_with("error[ConfigNotFound]"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn link_and_bind_failures() {
    let port = std::net::TcpListener::bind("127.0.0.1:0")
        .unwrap()
        .local_addr()
        .unwrap()
        .port();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("live.jsonl");
    let o = sg(&[
        "fly",
        "--mode",
        "live",
        "--persona",
        "gentle-cloud",
        "--robot",
        &format!("ws://127.0.0.1:{port}"),
        "--connect-timeout-ms",
        "1000",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(stderr(&o).starts_with("error[LinkError]"));

    let held = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = held.local_addr().unwrap().to_string();
    let truth = dir.path().join("truth.jsonl");
    let o = sg(&[
        "emulate",
        "--listen",
        &addr,
        "--truth-log",
        truth.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 4, "{}", stderr(&o));
    assert!(stderr(&o).starts_with("error[BindFailure]"));
}

#[test]
fn schema_violation_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let log = fly(dir.path(), "gentle-cloud", 3);
    let text = std::fs::read_to_string(&log).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines[16] = r#"{"t_ms": 1, "persona_id": "x"}"#;
    std::fs::write(&log, lines.join("\n") + "\n").unwrap();
    let o = sg(&["analyze", "latency", &log]);
    assert_eq!(code(&o), 5);
    let err = stderr(&o);
    assert!(
        err.starts_with("error[SchemaViolation]") && err.contains("line 17"),
        "{err}"
    );
}

#[test]
fn analyses_over_fresh_logs() {
    let dir = tempfile::tempdir().unwrap();
    let logs: Vec<String> = [
        "eager-companion",
        "cautious-observer",
        "indifferent-explorer",
    ]
    .iter()
    .map(|p| fly(dir.path(), p, 4))
    .collect();
    let mut args = vec!["analyze", "fingerprint", "--json"];
    args.extend(logs.iter().map(String::as_str));
    let o = sg(&args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["result"]["df"], 4);
    assert!(v["result"]["p_value"].as_f64().unwrap() < 1e-3);

    let csv = dir.path().join("table.csv");
    let mut args = vec!["analyze", "stance", "--csv", csv.to_str().unwrap()];
    args.extend(logs.iter().map(String::as_str));
    let o = sg(&args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("chi2(2"), "{text}");
    assert!(std::fs::read_to_string(&csv)
        .unwrap()
        .starts_with("persona,approach,avoid"));

    let mut args = vec!["analyze", "stance", "--keywords"];
    args.extend(logs.iter().map(String::as_str));
    assert_eq!(code(&sg(&args)), 0);

    let o = sg(&["analyze", "latency", "--json", &logs[0]]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["mean_s"].as_f64().unwrap() - 2.8).abs() < 0.1);

    let o = sg(&["analyze", "fingerprint", &logs[0]]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).starts_with("error[InsufficientPersonas]"));

    std::fs::remove_file(dir.path().join("eager-companion-4.obs.jsonl")).unwrap();
    let mut args = vec!["analyze", "stance"];
    args.extend(logs.iter().map(String::as_str));
    let o = sg(&args);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("--keywords"));
}

#[test]
fn sim_flight_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let snaps = dir.path().join("snaps");
    let out = dir.path().join("cloud.jsonl");
    let o = Command::new(SG)
        .args([
            "fly",
            "--persona",
            "gentle-cloud",
            "--decisions",
            "12",
            "--snapshots",
        ])
        .arg(&snaps)
        .arg("-o")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 12);
    assert!(
        stdout.lines().all(|l| l.chars().nth(1) == Some(',')),
        "{stdout}"
    );
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 12);
    let m: Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("cloud.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(m["mode"], "sim");
    assert_eq!(m["records"], 12);
    assert_eq!(m["seed"], 1);
    assert!(std::fs::read_dir(&snaps).unwrap().count() > 0);
}
