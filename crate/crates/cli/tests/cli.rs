use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use cascade_core::embed_store::{write_embeddings, EmbeddingMatrix};

const CLASSES: [&str; 2] = ["negative", "positive"];

/// Sixty labelled documents whose first embedding axis mostly follows the
/// label, with a few documents near the boundary.
fn write_corpus(dir: &Path) {
    let n = 60;
    let mut lines = String::new();
    let mut ids = Vec::new();
    let mut values = Vec::new();
    for i in 0..n {
        let label = i % 2;
        let id = format!("c{i:02}");
        let sign = if label == 1 { 1.0 } else { -1.0 };
        let spread = ((i * 37) % 11) as f32 / 10.0;
        let axis = if i % 10 < 2 {
            -0.2 * sign
        } else {
            sign * (0.5 + spread)
        };
        values.extend([axis, ((i * 13) % 7) as f32 / 7.0 - 0.5, spread - 0.5]);
        lines.push_str(&format!(
            "{{\"id\":\"{id}\",\"text\":\"review {i}\",\"label\":\"{}\"}}\n",
            CLASSES[label]
        ));
        ids.push(id);
    }
    fs::write(dir.join("corpus.jsonl"), lines).unwrap();
    fs::write(dir.join("classes.json"), "[\"negative\",\"positive\"]").unwrap();
    let m = EmbeddingMatrix::new(ids, 3, values, "toy").unwrap();
    write_embeddings(&m, &dir.join("embeddings.cgem")).unwrap();
    fs::write(
        dir.join("run.toml"),
        "seed = 3\nk = 3\noutput_dir = \"out\"\n\n\
         [dataset]\nname = \"toy\"\npath = \"corpus.jsonl\"\nembeddings = \"embeddings.cgem\"\n\n\
         [backend]\nkind = \"replay\"\ncassette = \"gold.jsonl\"\nretry_backoff_ms = 0\n\n\
         [clock]\nmode = \"virtual\"\n",
    )
    .unwrap();
}

fn cascade(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cascade"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("run cascade")
}

fn ok(out: Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn full_workflow_from_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_corpus(d);

    ok(cascade(
        d,
        &[
            "export-cassette",
            "-m",
            "run.toml",
            "--source",
            "gold",
            "--out",
            "gold.jsonl",
        ],
    ));
    assert_eq!(
        fs::read_to_string(d.join("gold.jsonl"))
            .unwrap()
            .lines()
            .count(),
        60
    );

    let trained = ok(cascade(d, &["train", "-m", "run.toml"]));
    assert_eq!(
        trained.lines().filter(|l| l.starts_with("fold ")).count(),
        3
    );
    assert!(d.join("out/models/fold2.cglr").is_file());

    let report = ok(cascade(
        d,
        &["evaluate", "-m", "run.toml", "--grid", "0.6,0.8,0.95"],
    ));
    assert!(report.contains("cascade"), "{report}");
    let results = d.join("out/results.json");
    assert!(results.is_file());
    let before = fs::read(d.join("out/report.txt")).unwrap();

    let rerendered = ok(cascade(
        d,
        &["report", "out/results.json", "--out", "again"],
    ));
    assert_eq!(
        rerendered.trim_end(),
        String::from_utf8(before).unwrap().trim_end()
    );
    assert!(d.join("again/costs.csv").is_file());

    ok(cascade(
        d,
        &["sweep", "-m", "run.toml", "--grid", "0.6,0.95"],
    ));
    let sweep = fs::read_to_string(d.join("out/sweep.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 3);
    assert!(sweep.starts_with("threshold,macro_f1,instances_sent,pct,total_time_s"));

    ok(cascade(
        d,
        &[
            "route",
            "-m",
            "run.toml",
            "--threshold",
            "0.9",
            "--model",
            "out/models/fold0.cglr",
            "--out",
            "routed.jsonl",
        ],
    ));
    assert_eq!(
        fs::read_to_string(d.join("routed.jsonl"))
            .unwrap()
            .lines()
            .count(),
        60
    );
}

#[test]
fn flags_work_without_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_corpus(d);
    let out = ok(cascade(
        d,
        &[
            "train",
            "--dataset",
            "corpus.jsonl",
            "--embeddings",
            "embeddings.cgem",
            "--k",
            "2",
            "--output-dir",
            "flags",
        ],
    ));
    assert_eq!(out.lines().filter(|l| l.starts_with("fold ")).count(), 2);
    assert!(d.join("flags/models/fold1.cglr").is_file());
}

#[test]
fn missing_embeddings_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_corpus(d);
    let out = cascade(
        d,
        &["train", "-m", "run.toml", "--embeddings", "absent.cgem"],
    );
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("absent.cgem"), "{stderr}");
}

#[test]
fn invalid_configuration_exits_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_corpus(d);
    let out = cascade(d, &["evaluate", "-m", "run.toml", "--threshold", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = cascade(d, &["train"]);
    assert_eq!(out.status.code(), Some(2));
}
