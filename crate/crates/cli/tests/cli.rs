use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_claimcheck"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn fx(name: &str) -> String {
    fixtures().join(name).to_string_lossy().into_owned()
}

/// Index plus a quickly trained model in a fresh directory.
fn prepared() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["index", "--dump", &fx("dump.jsonl"), "--index", "c.idx"]);
    ok(
        d,
        &[
            "train", "--index", "c.idx", "--claims", &fx("claims.jsonl"), "--model", "m.vfnn", "--epochs", "5",
            "--seed", "1",
        ],
    );
    dir
}

fn predict(d: &Path, out: &str, extra: &[&str]) -> Vec<u8> {
    let claims = fx("claims.jsonl");
    let ann = fx("annotations.jsonl");
    let mut args = vec![
        "predict", "--index", "c.idx", "--model", "m.vfnn", "--claims", &claims, "--annotations", &ann, "--output", out,
    ];
    args.extend(extra);
    ok(d, &args);
    std::fs::read(d.join(out)).unwrap()
}

fn ids(bytes: &[u8]) -> Vec<u64> {
    String::from_utf8_lossy(bytes)
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["id"].as_u64().unwrap())
        .collect()
}

#[test]
fn index_counts_retained_sentences() {
    // oracle: every row with non-blank text after the tab
    let dump = std::fs::read_to_string(fixtures().join("dump.jsonl")).unwrap();
    let expected: usize = dump
        .lines()
        .map(|l| {
            let v: serde_json::Value = serde_json::from_str(l).unwrap();
            v["lines"]
                .as_str()
                .unwrap()
                .split('\n')
                .filter(|row| row.split('\t').nth(1).is_some_and(|s| !s.trim().is_empty()))
                .count()
        })
        .sum();
    let dir = tempfile::tempdir().unwrap();
    let out = ok(dir.path(), &["index", "--dump", &fx("dump.jsonl"), "--index", "c.idx"]);
    assert!(out.contains(&format!("documents {expected},")), "{out}");
    assert!(out.contains("pages 20"), "{out}");
}

#[test]
fn index_empty_and_corrupt_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("empty.jsonl"), "").unwrap();
    let out = ok(d, &["index", "--dump", "empty.jsonl", "--index", "e.idx"]);
    assert!(out.contains("documents 0"), "{out}");

    let good = std::fs::read_to_string(fixtures().join("dump.jsonl")).unwrap();
    std::fs::write(d.join("bad.jsonl"), format!("{{not json\n{good}")).unwrap();
    let out = run(d, &["index", "--dump", "bad.jsonl", "--index", "b.idx"]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("warnings 1"), "{stdout}");
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn predict_is_aligned_and_reproducible() {
    let dir = prepared();
    let d = dir.path();
    let a = predict(d, "a.jsonl", &["--workers", "1"]);
    let b = predict(d, "b.jsonl", &["--workers", "8"]);
    let c = predict(d, "c.jsonl", &["--workers", "1"]);
    assert_eq!(a, b);
    assert_eq!(a, c);
    // claims 6 and 12 have no annotations and still get a line
    assert_eq!(ids(&a), (1..=12).collect::<Vec<_>>());
    for line in String::from_utf8_lossy(&a).lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["predicted_evidence"].as_array().unwrap().len() <= 5);
        assert!(v.get("diagnostics").is_none());
    }
    let diag = predict(d, "d.jsonl", &["--diagnostics"]);
    assert!(String::from_utf8_lossy(&diag).contains("\"diagnostics\""));
}

#[test]
fn predict_missing_model_names_path() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["index", "--dump", &fx("dump.jsonl"), "--index", "c.idx"]);
    let out = run(
        d,
        &["predict", "--index", "c.idx", "--model", "nope.vfnn", "--claims", &fx("claims.jsonl"), "--output", "v.jsonl"],
    );
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.vfnn"));
}

#[test]
fn flags_override_config_file() {
    let dir = prepared();
    let d = dir.path();
    std::fs::write(d.join("run.toml"), "max_evidence = 1\nno_merge = true\n").unwrap();
    let from_file = predict(d, "f.jsonl", &["--config", "run.toml"]);
    let max_len = |b: &[u8]| {
        String::from_utf8_lossy(b)
            .lines()
            .map(|l| {
                let v: serde_json::Value = serde_json::from_str(l).unwrap();
                v["predicted_evidence"].as_array().unwrap().len()
            })
            .max()
            .unwrap()
    };
    assert_eq!(max_len(&from_file), 1);
    let flagged = predict(d, "g.jsonl", &["--config", "run.toml", "--max-evidence", "3"]);
    assert_eq!(max_len(&flagged), 3);

    std::fs::write(d.join("bad.toml"), "dampen_factor = 2.0\n").unwrap();
    let out = run(d, &["--config", "bad.toml", "gradcheck", "--draws", "1"]);
    assert!(!out.status.success());
}

#[test]
fn ablation_flags_run() {
    let dir = prepared();
    let d = dir.path();
    for flag in ["--no-points", "--no-merge", "--no-conv"] {
        let out = predict(d, "x.jsonl", &[flag]);
        assert_eq!(ids(&out).len(), 12);
    }
}

fn gold_line(id: u64, label: &str, ev: &str) -> String {
    format!(r#"{{"id": {id}, "claim": "c{id}", "label": "{label}", "evidence": {ev}}}"#)
}

#[test]
fn evaluate_hand_fixture_and_order() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let gold = [
        gold_line(1, "SUPPORTS", r#"[[[0, 0, "P", 0]]]"#),
        gold_line(2, "REFUTES", r#"[[[0, 0, "Q", 1], [0, 1, "R", 2]]]"#),
        gold_line(3, "NOT ENOUGH INFO", r#"[[[0, null, null, null]]]"#),
        gold_line(4, "SUPPORTS", r#"[[[0, 0, "S", 0]]]"#),
    ];
    std::fs::write(d.join("gold.jsonl"), gold.join("\n")).unwrap();
    let preds = [
        r#"{"id": 1, "predicted_label": "SUPPORTS", "predicted_evidence": [["P", 0], ["X", 3]]}"#,
        r#"{"id": 2, "predicted_label": "REFUTES", "predicted_evidence": [["Q", 1]]}"#,
        r#"{"id": 3, "predicted_label": "NOT ENOUGH INFO", "predicted_evidence": []}"#,
        r#"{"id": 4, "predicted_label": "NOT ENOUGH INFO", "predicted_evidence": [["S", 0]]}"#,
    ];
    std::fs::write(d.join("p.jsonl"), preds.join("\n")).unwrap();
    let mut shuffled = preds.to_vec();
    shuffled.reverse();
    shuffled.swap(0, 2);
    std::fs::write(d.join("s.jsonl"), shuffled.join("\n")).unwrap();

    let table = ok(d, &["evaluate", "--claims", "gold.jsonl", "--predictions", "p.jsonl", "--output", "r1.json"]);
    ok(d, &["evaluate", "--claims", "gold.jsonl", "--predictions", "s.jsonl", "--output", "r2.json"]);
    let r1 = std::fs::read(d.join("r1.json")).unwrap();
    assert_eq!(r1, std::fs::read(d.join("r2.json")).unwrap());
    let v: serde_json::Value = serde_json::from_slice(&r1).unwrap();
    assert!((v["label_accuracy"].as_f64().unwrap() - 0.75).abs() < 1e-9);
    assert!((v["evidence_recall"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-9);
    assert!((v["fever_score"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    assert_eq!(v["n_claims"], 4);
    assert!(table.contains("Label") && table.contains("Recall") && table.contains("Score"));
    assert!(table.contains("0.7500   0.6667   0.5000"), "{table}");

    std::fs::write(d.join("partial.jsonl"), preds[..2].join("\n")).unwrap();
    let out = run(d, &["evaluate", "--claims", "gold.jsonl", "--predictions", "partial.jsonl"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("[3, 4]"));
}

#[test]
fn evaluate_perfect_predictions() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let claims = std::fs::read_to_string(fixtures().join("claims.jsonl")).unwrap();
    let perfect: Vec<String> = claims
        .lines()
        .map(|l| {
            let v: serde_json::Value = serde_json::from_str(l).unwrap();
            let ev: Vec<serde_json::Value> = v["evidence"][0]
                .as_array()
                .unwrap()
                .iter()
                .filter(|e| !e[2].is_null())
                .map(|e| serde_json::json!([e[2], e[3]]))
                .collect();
            serde_json::json!({"id": v["id"], "predicted_label": v["label"], "predicted_evidence": ev}).to_string()
        })
        .collect();
    std::fs::write(d.join("p.jsonl"), perfect.join("\n")).unwrap();
    let out = ok(d, &["evaluate", "--claims", &fx("claims.jsonl"), "--predictions", "p.jsonl"]);
    assert!(out.contains("1.0000   1.0000   1.0000"), "{out}");
}

#[test]
fn train_from_pairs_in_single_precision() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let pairs = [
        r#"{"premise": "a cat sat on the mat", "hypothesis": "a cat sat", "label": "SUPPORTS"}"#,
        r#"{"premise": "a dog ran in the park", "hypothesis": "a dog slept", "label": "REFUTES"}"#,
        r#"{"premise": "the sun is hot", "hypothesis": "bread is cheap", "label": "NOT ENOUGH INFO"}"#,
    ];
    std::fs::write(d.join("pairs.jsonl"), pairs.join("\n")).unwrap();
    let out = ok(
        d,
        &[
            "train", "--pairs", "pairs.jsonl", "--model", "m.vfnn", "--epochs", "3", "--precision", "f32", "--embed-dim",
            "8", "--hidden", "8",
        ],
    );
    assert!(out.contains("pairs 3"), "{out}");
    let bytes = std::fs::read(d.join("m.vfnn")).unwrap();
    assert_eq!(&bytes[..4], b"VFNN");
    assert_eq!(bytes[8], 4);

    let a = std::fs::read(d.join("m.vfnn")).unwrap();
    ok(
        d,
        &[
            "train", "--pairs", "pairs.jsonl", "--model", "m.vfnn", "--epochs", "3", "--precision", "f32", "--embed-dim",
            "8", "--hidden", "8",
        ],
    );
    assert_eq!(a, std::fs::read(d.join("m.vfnn")).unwrap());

    let out = run(d, &["train", "--model", "x.vfnn"]);
    assert!(!out.status.success());
}

#[test]
fn gradcheck_and_tag_commands() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = ok(d, &["gradcheck", "--draws", "2", "--seed", "5"]);
    assert!(out.contains("worst"), "{out}");

    std::fs::write(d.join("texts.txt"), "Scotland is beautiful.\nHe ran 5 miles.\n").unwrap();
    ok(d, &["--workers", "2", "tag", "--input", "texts.txt", "--output", "tags.txt"]);
    let tags = std::fs::read_to_string(d.join("tags.txt")).unwrap();
    assert_eq!(tags.lines().next().unwrap(), "Scotland_NNP is_VBZ beautiful_JJ ._.");
    assert_eq!(tags.lines().count(), 2);
}
