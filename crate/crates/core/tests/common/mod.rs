//! Synthetic corpora and fixtures shared by the integration tests.
#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};
use rand_distr::{Distribution, Normal};

use cascade_core::classifier::{CalibratedModel, FeatureScaler, TrainingMeta};
use cascade_core::corpus::Document;
use cascade_core::embed_store::{write_embeddings, EmbeddingMatrix};
use cascade_core::harness::{ClockMode, RunManifest};
use cascade_core::llm::{
    prompt_sha256, BackendConfig, BackendKind, Cassette, CassetteEntry, Gateway, PromptTemplate,
    ReplayBackend,
};

pub const CLASSES: [&str; 2] = ["negative", "positive"];

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn class_names() -> Vec<String> {
    CLASSES.iter().map(|c| c.to_string()).collect()
}

/// Two-class corpus whose embeddings are unit-variance Gaussians with class
/// means `±separation/2` on the first axis; the other axes are noise.
pub struct SyntheticCorpus {
    pub corpus_path: PathBuf,
    pub embeddings_path: PathBuf,
    pub labels: Vec<usize>,
}

pub fn write_gaussian_corpus(
    dir: &Path,
    n: usize,
    dim: usize,
    separation: f64,
    seed: u64,
) -> SyntheticCorpus {
    let mut r = rng(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut lines = String::new();
    let mut ids = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n * dim);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let label = i % 2;
        let id = format!("d{i:04}");
        let sign = if label == 1 { 0.5 } else { -0.5 };
        for j in 0..dim {
            let mean = if j == 0 { sign * separation } else { 0.0 };
            values.push((mean + normal.sample(&mut r)) as f32);
        }
        lines.push_str(&format!(
            "{{\"id\":\"{id}\",\"text\":\"synthetic review number {i}\",\"label\":\"{}\"}}\n",
            CLASSES[label]
        ));
        ids.push(id);
        labels.push(label);
    }
    let corpus_path = dir.join("corpus.jsonl");
    fs::write(&corpus_path, lines).unwrap();
    fs::write(
        dir.join("classes.json"),
        serde_json::to_string(&CLASSES).unwrap(),
    )
    .unwrap();
    let embeddings_path = dir.join("embeddings.cgem");
    let m = EmbeddingMatrix::new(ids, dim, values, "synthetic-gaussian").unwrap();
    write_embeddings(&m, &embeddings_path).unwrap();
    SyntheticCorpus {
        corpus_path,
        embeddings_path,
        labels,
    }
}

/// Manifest over a synthetic corpus answering from the given cassette,
/// with the virtual clock and no retry backoff.
pub fn replay_manifest(data: &SyntheticCorpus, cassette: &Path, out: &Path) -> RunManifest {
    let mut m = RunManifest::new(data.corpus_path.clone(), data.embeddings_path.clone());
    m.dataset.name = "synthetic".into();
    m.output_dir = out.to_path_buf();
    m.backend = BackendConfig {
        kind: BackendKind::Replay,
        cassette: Some(cassette.to_path_buf()),
        retry_backoff_ms: 0,
        ..BackendConfig::default()
    };
    m.clock.mode = ClockMode::Virtual;
    m
}

/// Random model with identity scaling.
pub fn random_model(r: &mut StdRng, n_classes: usize, dim: usize, scale: f64) -> CalibratedModel {
    let weights = (0..n_classes * dim)
        .map(|_| scale * (2.0 * r.random::<f64>() - 1.0))
        .collect();
    let bias = (0..n_classes).map(|_| r.random::<f64>() - 0.5).collect();
    CalibratedModel::from_parts(
        weights,
        bias,
        FeatureScaler {
            mean: vec![0.0; dim],
            std: vec![1.0; dim],
        },
        TrainingMeta {
            iterations: 0,
            objective: 0.0,
            lambda: 0.0,
            converged: true,
        },
    )
    .unwrap()
}

pub fn random_matrix(r: &mut StdRng, n: usize, dim: usize) -> (Vec<Document>, EmbeddingMatrix) {
    let normal = Normal::new(0.0, 1.0).unwrap();
    let ids: Vec<String> = (0..n).map(|i| format!("doc{i}")).collect();
    let values = (0..n * dim).map(|_| normal.sample(r) as f32).collect();
    let docs = ids
        .iter()
        .map(|id| Document {
            id: id.clone(),
            text: format!("text of {id}"),
            label: None,
        })
        .collect();
    (
        docs,
        EmbeddingMatrix::new(ids, dim, values, "random").unwrap(),
    )
}

/// Gateway replaying `answers[i]` for the default-template prompt of
/// `docs[i]`.
pub fn answering_gateway(docs: &[Document], answers: &[String]) -> Gateway {
    let template = PromptTemplate::default();
    let mut cassette = Cassette::new();
    for (doc, answer) in docs.iter().zip(answers) {
        let prompt = template.render(&CLASSES, &doc.text).unwrap();
        cassette
            .insert(CassetteEntry {
                prompt_sha256: prompt_sha256(&prompt),
                completion: answer.clone(),
                latency_s: Some(0.5),
            })
            .unwrap();
    }
    let config = BackendConfig {
        retry_backoff_ms: 0,
        ..BackendConfig::default()
    };
    Gateway::with_backend(&config, Arc::new(ReplayBackend::new(cassette)))
}

/// Completion naming class `label`.
pub fn says(label: usize) -> String {
    format!(" {}.", CLASSES[label])
}
