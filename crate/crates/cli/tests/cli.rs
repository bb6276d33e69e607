use std::path::Path;
use std::process::{Command, Output, Stdio};

fn chatmood(dir: &Path, args: &[&str]) -> Output {
    let config = dir.join("run.toml");
    Command::new(env!("CARGO_BIN_EXE_chatmood"))
        .arg("--config")
        .arg(&config)
        .args(args)
        .stdin(Stdio::null())
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = chatmood(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn fixture(dir: &Path, per_class: &str) {
    let out = Command::new(env!("CARGO_BIN_EXE_chatmood"))
        .args(["generate-fixture", "--per-class", per_class, "--days", "5", "--dir"])
        .arg(dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let config = std::fs::read_to_string(dir.join("run.toml")).unwrap();
    assert!(config.contains("[evolution]"));
    let small = "[evolution]\npopulation_size = 4\ngenerations = 1\nfitness_splits = 1\n";
    std::fs::write(dir.join("run.toml"), config.replace("[evolution]\n", small)).unwrap();
}

#[test]
fn full_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    fixture(dir, "20");
    let ingest = ok(dir, &["--deterministic", "ingest"]);
    assert!(ingest.contains("61 messages"), "{ingest}");
    ok(dir, &["--deterministic", "featurize"]);
    ok(dir, &["--deterministic", "train"]);
    let eval = ok(dir, &["--deterministic", "evaluate", "--repeats", "3", "--ratio", "0.2"]);
    assert!(!eval.is_empty());
    ok(dir, &["--deterministic", "score"]);
    ok(dir, &["--deterministic", "report", "--source", "labels"]);
    ok(dir, &["--deterministic", "report", "--source", "predicted"]);
    let run = dir.join("run");
    for name in ["model.json", "report.txt", "confusion.csv", "predictions.csv", "mood_labels.svg", "mood_predicted.csv"] {
        assert!(run.join(name).exists(), "{name} missing");
    }
    let csv = std::fs::read_to_string(run.join("mood_labels.csv")).unwrap();
    assert!(csv.starts_with("date,mean_score,count"));
    let svg = std::fs::read_to_string(run.join("mood_labels.svg")).unwrap();
    assert!(svg.contains("class=\"trend\""));
}

#[test]
fn missing_upstream_names_command() {
    let tmp = tempfile::tempdir().unwrap();
    fixture(tmp.path(), "5");
    let out = chatmood(tmp.path(), &["train"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("chatmood"), "{err}");
    assert!(err.contains("featurize") || err.contains("ingest"), "{err}");
}

#[test]
fn missing_input_fails() {
    let tmp = tempfile::tempdir().unwrap();
    fixture(tmp.path(), "5");
    let out = chatmood(tmp.path(), &["ingest", "does-not-exist.jsonl"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn label_requires_terminal() {
    let tmp = tempfile::tempdir().unwrap();
    fixture(tmp.path(), "5");
    ok(tmp.path(), &["ingest"]);
    let out = chatmood(tmp.path(), &["label", "--rater", "alice"]);
    assert!(!out.status.success());
    assert!(!out.stderr.is_empty());
}

#[test]
fn rejects_bad_ratio() {
    let tmp = tempfile::tempdir().unwrap();
    fixture(tmp.path(), "5");
    let out = chatmood(tmp.path(), &["evaluate", "--ratio", "1.5"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--ratio"));
}
