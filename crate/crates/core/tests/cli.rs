use std::path::Path;
use std::process::{Command, Output};

use pitchscope::summary::MatchSummary;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pitchscope"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Simulated match plus a trained model in `dir`.
fn fixture(dir: &Path) {
    let sim = dir.join("sim");
    ok(&["simulate", "--output", s(&sim), "--frames", "250", "--seed", "3"]);
    ok(&["train-highlights", "--synthetic", "40", "--epochs", "200", "-o", s(&dir.join("model.bin"))]);
}

fn analyze(dir: &Path, out: &str) -> std::path::PathBuf {
    let target = dir.join(out);
    ok(&[
        "analyze",
        "-i",
        s(&dir.join("sim/frames.jsonl")),
        "-o",
        s(&target),
        "--clips",
        s(&dir.join("sim/clips.jsonl")),
        "--model",
        s(&dir.join("model.bin")),
    ]);
    target
}

#[test]
fn help_lists_subcommands_and_flags() {
    let top = String::from_utf8(ok(&["--help"]).stdout).unwrap();
    for cmd in ["simulate", "analyze", "score", "train-highlights"] {
        assert!(top.contains(cmd), "missing {cmd} in:\n{top}");
    }
    let analyze = String::from_utf8(ok(&["analyze", "--help"]).stdout).unwrap();
    for flag in ["--input", "--output", "--clips", "--model", "--config", "--set", "--memory-log", "--list-keys"] {
        assert!(analyze.contains(flag), "missing {flag} in:\n{analyze}");
    }
}

#[test]
fn missing_input_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.jsonl");
    let out = run(&["analyze", "-i", s(&missing), "-o", s(&dir.path().join("out"))]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains(s(&missing)));
}

#[test]
fn unknown_config_key_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["analyze", "-i", "-", "-o", s(dir.path()), "--set", "tracker.bogus=1"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("tracker.bogus"));
}

#[test]
fn list_keys_prints_known_keys() {
    let keys = String::from_utf8(ok(&["analyze", "--list-keys"]).stdout).unwrap();
    assert!(keys.lines().any(|l| l == "team.window"));
}

#[test]
fn end_to_end_outputs_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path());
    let a = analyze(dir.path(), "a");
    let b = analyze(dir.path(), "b");
    for name in ["tracks.jsonl", "summary.json", "heatmap.csv", "highlights.json"] {
        let x = std::fs::read(a.join(name)).unwrap_or_else(|_| panic!("{name} written"));
        let y = std::fs::read(b.join(name)).unwrap();
        assert!(!x.is_empty(), "{name} empty");
        assert_eq!(x, y, "{name} differs between identical runs");
    }

    let text = std::fs::read_to_string(a.join("summary.json")).unwrap();
    let summary = MatchSummary::from_json(&text).unwrap();
    assert_eq!(summary.to_json(), text);
    assert_eq!(summary.frames, 250);
    let p = summary.possession_rates();
    if let Some(p) = p {
        assert!((p.team_a + p.team_b - 1.0).abs() < 1e-9);
    }

    let scored =
        ok(&["score", "--truth", s(&dir.path().join("sim/truth.jsonl")), "--tracks", s(&a.join("tracks.jsonl"))]);
    let metrics: serde_json::Value = serde_json::from_slice(&scored.stdout).unwrap();
    assert!(metrics["ground_truth_boxes"].as_u64().unwrap() > 0);
}

#[test]
fn streams_through_stdin() {
    let dir = tempfile::tempdir().unwrap();
    let mut sim = bin()
        .args(["simulate", "--stream", "--no-truth", "--no-clips", "--frames", "60", "--output", s(dir.path())])
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    let out_dir = dir.path().join("out");
    let log = dir.path().join("mem.csv");
    let analyze = bin()
        .args(["analyze", "-i", "-", "-o", s(&out_dir), "--memory-log", s(&log), "--set", "memory_log_every=20"])
        .stdin(sim.stdout.take().unwrap())
        .output()
        .unwrap();
    assert!(sim.wait().unwrap().success());
    assert!(analyze.status.success(), "{}", String::from_utf8_lossy(&analyze.stderr));
    let lines = std::fs::read_to_string(out_dir.join("tracks.jsonl")).unwrap().lines().count();
    assert_eq!(lines, 60);
    let mem = std::fs::read_to_string(log).unwrap();
    assert_eq!(mem.lines().count(), 3);
}
