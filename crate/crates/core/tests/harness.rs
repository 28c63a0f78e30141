mod common;

use std::fs;
use std::path::Path;

use cascade_core::harness::{
    cmd_evaluate, cmd_export_cassette, cmd_report, cmd_route, cmd_sweep, cmd_train, model_path,
    CassetteSource, Method, RunManifest,
};
use cascade_core::llm::Cassette;
use cascade_core::metrics::{paired_t_test, Verdict};

/// Synthetic corpus plus a gold cassette under `dir`.
fn setup(dir: &Path, n: usize) -> RunManifest {
    let data = common::write_gaussian_corpus(dir, n, 6, 1.7, 5);
    let cassette = dir.join("gold.jsonl");
    let m = common::replay_manifest(&data, &cassette, &dir.join("run"));
    cmd_export_cassette(&m, CassetteSource::Gold, 0.8, &cassette).unwrap();
    m
}

fn read(path: &Path) -> Vec<u8> {
    fs::read(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn train_writes_one_model_per_fold_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let m = setup(dir.path(), 120);
    let first = cmd_train(&m).unwrap();
    assert_eq!(first.len(), 5);
    let bytes: Vec<Vec<u8>> = (0..5)
        .map(|f| read(&model_path(&m.output_dir, f)))
        .collect();
    for f in 0..5 {
        assert!(m.output_dir.join(format!("models/fold{f}.cglr")).is_file());
    }
    cmd_train(&m).unwrap();
    for (f, b) in bytes.iter().enumerate() {
        assert_eq!(&read(&model_path(&m.output_dir, f)), b);
    }
    assert!(m.output_dir.join("manifest.toml").is_file());
}

#[test]
fn missing_embeddings_is_an_input_error_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let mut m = setup(dir.path(), 40);
    m.dataset.embeddings = dir.path().join("nowhere.cgem");
    let err = cmd_train(&m).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("nowhere.cgem"), "{err}");
}

#[test]
fn gold_cassette_answers_every_prompt_correctly() {
    let dir = tempfile::tempdir().unwrap();
    let m = setup(dir.path(), 30);
    let gold = Cassette::load(&dir.path().join("gold.jsonl")).unwrap();
    assert_eq!(gold.len(), 30);
    let inverted = dir.path().join("inverted.jsonl");
    assert_eq!(
        cmd_export_cassette(&m, CassetteSource::Inverted, 0.0, &inverted).unwrap(),
        30
    );
    let inv = Cassette::load(&inverted).unwrap();
    for (g, i) in gold.entries().iter().zip(inv.entries()) {
        assert_eq!(g.prompt_sha256, i.prompt_sha256);
        assert_ne!(g.completion, i.completion);
    }
}

#[test]
fn evaluate_writes_a_complete_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let m = setup(dir.path(), 200);
    let results = cmd_evaluate(&m).unwrap();
    let local = &results.effectiveness[0];
    let cascade = &results.effectiveness[1];
    assert_eq!(local.method, "local");
    assert_eq!(cascade.method, "cascade");
    for (c, l) in cascade.folds.iter().zip(&local.folds) {
        assert!(c >= l, "cascade {c} < local {l}");
    }
    // A perfect LLM-only baseline scores 1 on every fold.
    assert!(results.effectiveness[2].folds.iter().all(|&v| v == 1.0));
    assert_eq!(results.ttests.len(), 3);
    let same = paired_t_test(&local.folds, &local.folds, 0.05).unwrap();
    assert_eq!((same.verdict, same.t), (Verdict::Tie, 0.0));

    for name in [
        "manifest.toml",
        "results.json",
        "effectiveness.csv",
        "effectiveness.txt",
        "ttest.csv",
        "costs.csv",
        "costs.txt",
        "audit.csv",
        "thresholds.csv",
        "report.txt",
        "outcomes/fold0.jsonl",
        "outcomes/fold4.jsonl",
    ] {
        assert!(m.output_dir.join(name).is_file(), "missing {name}");
    }
    let thresholds = results.thresholds.as_ref().unwrap();
    assert_eq!(thresholds.per_fold.len(), 5);
    assert!(thresholds.per_fold.contains(&thresholds.mode));
    let audit = results.audit.as_ref().unwrap();
    assert_eq!(audit.pooled.total, 200);
    assert_eq!(
        audit.per_fold.iter().map(|a| a.routed).sum::<usize>(),
        audit.pooled.routed
    );

    // The costs of each method add up from the per-fold phase times.
    for c in &results.costs {
        assert_eq!(c.per_fold_seconds.len(), 5);
        let total: f64 = c.per_fold_seconds.iter().sum();
        assert!((total - c.total_seconds).abs() < 1e-9);
    }

    // Re-rendering from results.json reproduces the tables byte for byte.
    let before = read(&m.output_dir.join("report.txt"));
    let again = dir.path().join("again");
    let text = cmd_report(&m.output_dir.join("results.json"), Some(&again)).unwrap();
    assert_eq!(text.as_bytes(), before.as_slice());
    assert_eq!(
        read(&again.join("costs.csv")),
        read(&m.output_dir.join("costs.csv"))
    );
}

#[test]
fn two_folds_render_with_one_degree_of_freedom() {
    let dir = tempfile::tempdir().unwrap();
    let mut m = setup(dir.path(), 60);
    m.k = 2;
    m.methods = vec![Method::Local, Method::Cascade];
    m.router.threshold = Some(0.95);
    let results = cmd_evaluate(&m).unwrap();
    assert_eq!(results.ttests.len(), 1);
    assert!((results.ttests[0].critical - 12.706).abs() < 1e-3);
    assert!(results.thresholds.unwrap().tables.is_empty());
    let text = fs::read_to_string(m.output_dir.join("report.txt")).unwrap();
    assert!(text.contains("cascade"));
}

#[test]
fn sweep_averages_folds_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let mut m = setup(dir.path(), 100);
    m.router.grid = vec![0.7, 0.95];
    let rows = cmd_sweep(&m).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].instances_sent <= rows[1].instances_sent);
    let csv = read(&m.output_dir.join("sweep.csv"));
    assert_eq!(String::from_utf8_lossy(&csv).lines().count(), 3);
    assert!(m.output_dir.join("sweep/fold4.csv").is_file());
    cmd_sweep(&m).unwrap();
    assert_eq!(read(&m.output_dir.join("sweep.csv")), csv);
}

#[test]
fn route_writes_outcomes_for_every_document() {
    let dir = tempfile::tempdir().unwrap();
    let mut m = setup(dir.path(), 50);
    cmd_train(&m).unwrap();
    m.router.threshold = Some(0.9);
    let out = dir.path().join("routed/out.jsonl");
    let summary = cmd_route(&m, &model_path(&m.output_dir, 0), &out).unwrap();
    assert_eq!(summary.documents, 50);
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 50);
    let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    for key in [
        "id",
        "confidence",
        "route",
        "local_label",
        "llm_label",
        "final_label",
        "latency",
    ] {
        assert!(first.get(key).is_some(), "missing {key}");
    }
    assert_eq!(summary.audit.unwrap().routed, summary.sent);

    m.router.threshold = None;
    assert_eq!(
        cmd_route(&m, &model_path(&m.output_dir, 0), &out)
            .unwrap_err()
            .exit_code(),
        2
    );
}
