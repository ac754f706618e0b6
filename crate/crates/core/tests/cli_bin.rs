//! Exit-code and output contract of the compiled binary.

use std::path::Path;
use std::process::Command;

use phlt::cli::{cmd_train, AppConfig, OutputFormat};
use phlt::corpus::write_corpus;
use phlt::models::ModelKind;
use phlt::synthetic::generate_corpus;

fn phlt() -> Command {
    Command::new(env!("CARGO_BIN_EXE_phlt"))
}

#[test]
fn success_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.csv");
    write_corpus(&generate_corpus(10, 3), &corpus).unwrap();
    let output = phlt().args(["stats", corpus.to_str().unwrap()]).output().unwrap();
    assert!(output.status.success(), "{output:?}");
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("Token length distribution"));
}

#[test]
fn runtime_failure_exits_one() {
    let output = phlt()
        .args(["stats", "/nonexistent/corpus.csv"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1), "{output:?}");
}

#[test]
fn usage_errors_exit_two() {
    // unknown model kind is rejected by the parser
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.csv");
    write_corpus(&generate_corpus(10, 3), &corpus).unwrap();
    let output = phlt()
        .args([
            "train",
            corpus.to_str().unwrap(),
            "--kind",
            "transformer",
            "--model",
            "/tmp/x.phlt",
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2), "{output:?}");

    // k = 1 is a usage error
    let output = phlt()
        .args([
            "eval",
            corpus.to_str().unwrap(),
            "--kind",
            "mnb",
            "--folds",
            "1",
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2), "{output:?}");
}

#[test]
fn train_then_highlight_and_explain_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.csv");
    write_corpus(&generate_corpus(20, 5), &corpus).unwrap();
    let model = dir.path().join("model.phlt");

    let output = phlt()
        .args([
            "train",
            corpus.to_str().unwrap(),
            "--kind",
            "svm",
            "--model",
            model.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");

    let input = dir.path().join("doc.txt");
    std::fs::write(
        &input,
        "device according present invention advantage improved efficiency\n",
    )
    .unwrap();
    let output = phlt()
        .args([
            "highlight",
            input.to_str().unwrap(),
            "--model",
            model.to_str().unwrap(),
            "--format",
            "json",
        ])
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");
    let parsed: serde_json::Value =
        serde_json::from_slice(&output.stdout).expect("highlight emits valid JSON");
    assert_eq!(parsed["paragraphs"][0]["label"], 1);

    let output = phlt()
        .args([
            "explain",
            "advantage improved efficiency problem",
            "--model",
            model.to_str().unwrap(),
            "--top-k",
            "4",
        ])
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");
    let parsed: serde_json::Value =
        serde_json::from_slice(&output.stdout).expect("explain emits valid JSON");
    assert!(parsed["tokens"].as_array().unwrap().len() <= 4);
}

#[test]
fn eval_prints_per_fold_accuracies() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.csv");
    write_corpus(&generate_corpus(20, 9), &corpus).unwrap();
    let output = phlt()
        .args([
            "eval",
            corpus.to_str().unwrap(),
            "--kind",
            "mnb",
            "--folds",
            "5",
        ])
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("per-fold accuracy: ["));
}

#[test]
fn eval_supports_global_features_mode() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.csv");
    write_corpus(&generate_corpus(15, 17), &corpus).unwrap();
    let output = phlt()
        .args([
            "eval",
            corpus.to_str().unwrap(),
            "--kind",
            "svm",
            "--folds",
            "3",
            "--global-features",
            "--format",
            "json",
        ])
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");
    let parsed: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(parsed["per_fold_accuracy"].as_array().unwrap().len(), 3);
}

#[test]
fn highlight_grant_xml_uses_description_paragraphs() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.csv");
    write_corpus(&generate_corpus(20, 13), &corpus).unwrap();
    let model_path = dir.path().join("model.phlt");
    cmd_train(
        &corpus,
        ModelKind::Nbsvm,
        &AppConfig::default(),
        &model_path,
        OutputFormat::Text,
    )
    .unwrap();

    let grant = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/ipg200107.xml");
    // a single grant chunk: take the first document from the fixture
    let bulk = std::fs::read_to_string(grant).unwrap();
    let second_decl = bulk[1..].find("<?xml").unwrap() + 1;
    let single = &bulk[..second_decl];
    let input = dir.path().join("grant.xml");
    std::fs::write(&input, single).unwrap();

    let output = phlt()
        .args([
            "highlight",
            input.to_str().unwrap(),
            "--model",
            model_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");
    let parsed: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    // four non-empty <p> elements in the first fixture grant
    assert_eq!(parsed["paragraphs"].as_array().unwrap().len(), 4);
}
