use std::path::Path;
use std::process::Command;

use cnnexplain::study::{read_jsonl, write_jsonl, Answer, ScoreRecord, Task, TaskQuestion};

fn cnnexplain(dir: &Path, args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_cnnexplain"))
        .args(args)
        .current_dir(dir)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap();
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(
        out.status.success(),
        "{args:?} failed:\n{stdout}\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    stdout
}

#[test]
fn end_to_end_on_a_small_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let paths = cnnexplain(d, &["synth", "--out", "corpus", "--reviews", "1500", "--abstracts", "0", "--seed", "2"]);
    assert_eq!(paths.lines().count(), 3);
    let data = [
        "--dataset", "amazon", "--data", "corpus/reviews.csv", "--embeddings", "corpus/embeddings.txt", "--split",
        "split.json", "--sizes", "800,200,500",
    ];
    let with = |extra: &[&str]| -> Vec<String> { extra.iter().chain(&data).map(|s| s.to_string()).collect() };
    let run = |args: Vec<String>| cnnexplain(d, &args.iter().map(String::as_str).collect::<Vec<_>>());

    let report = run(with(&["train", "--out", "good.json", "--epochs", "3"]));
    assert!(report.contains("macro avg"), "{report}");
    run(with(&["train", "--out", "weak.json", "--epochs", "1", "--seed", "1"]));
    assert!(d.join("split.json").exists());

    let lines = run(with(&["explain", "--model", "good.json", "--method", "lrp_n", "--limit", "2"]));
    assert_eq!(lines.lines().count(), 2);
    let record: serde_json::Value = serde_json::from_str(lines.lines().next().unwrap()).unwrap();
    assert_eq!(record["method"], "lrp_n");
    assert!(record["evidence"].as_array().unwrap().len() <= 3);
    let one = run(with(&["explain", "--model", "good.json", "--method", "gradcam_text", "--text", "great product, works well"]));
    assert_eq!(one.lines().count(), 1);

    let trees = run(with(&["extract-dt", "--model", "good.json", "--out", "good-trees.json"]));
    assert!(trees.contains("#Nodes") && trees.contains("fidelity"), "{trees}");
    run(with(&["extract-dt", "--model", "weak.json", "--out", "weak-trees.json"]));

    run(with(&[
        "make-study", "--task", "1", "--model", "good.json", "--comparison", "weak.json", "--trees",
        "good-trees.json", "--comparison-trees", "weak-trees.json", "--questions", "2", "--out", "t1.jsonl",
    ]));
    let bank: Vec<TaskQuestion> = read_jsonl(d.join("t1.jsonl")).unwrap();
    assert_eq!(bank.len(), 18);
    assert!(bank.iter().all(|q| q.task == Task::One));

    let answers: Vec<Answer> = bank
        .iter()
        .enumerate()
        .map(|(i, q)| Answer {
            question_id: q.id.clone(),
            rater_id: "r1".into(),
            choice: q.hidden_key,
            confident: i % 2 == 0,
            timestamp: i as u64,
        })
        .collect();
    write_jsonl(d.join("answers.jsonl"), &answers).unwrap();
    let scored = cnnexplain(d, &["score", "--answers", "answers.jsonl", "--questions", "t1.jsonl"]);
    let records: Vec<ScoreRecord> = scored.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(records.len(), 18);
    assert!(records.iter().all(|r| r.mean == 1.0 || r.mean == 0.5));
    let table = cnnexplain(d, &["report", "--answers", "answers.jsonl", "--questions", "t1.jsonl"]);
    assert!(table.contains("LIME"), "{table}");
}

#[test]
fn bad_input_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_cnnexplain"))
        .args(["score", "--answers", "missing.jsonl", "--questions", "missing.jsonl"])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}
