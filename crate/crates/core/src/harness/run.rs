use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::manifest::{ClockMode, Method, RunManifest};
use super::report;
use crate::classifier::{read_model, train, write_model, CalibratedModel};
use crate::corpus::{load_corpus, split, stratified_folds, Corpus, Document, FoldPlan};
use crate::cost::{co2_kg, dollars, Clock, CostLedger, CostModel, Phase};
use crate::embed_store::{read_embeddings, EmbeddingMatrix};
use crate::error::{Error, Result};
use crate::llm::{prompt_sha256, Cassette, CassetteEntry, Gateway, LlmVerdict};
use crate::metrics::{fold_summary, macro_f1, paired_t_test, FoldScores, Verdict};
use crate::router::{
    ask_llm, assemble, audit, predict, route, sweep, tune_threshold, write_outcomes_jsonl,
    write_sweep_csv, RoutedSubsetReport, RoutingOutcome, ThresholdScore,
};

/// Corpus with embeddings reordered to match it, plus the fold plan.
pub struct Inputs {
    pub corpus: Corpus,
    pub embeddings: EmbeddingMatrix,
    pub plan: FoldPlan,
}

pub fn load_inputs(manifest: &RunManifest) -> Result<Inputs> {
    manifest.validate()?;
    let (corpus, embeddings) = load_aligned(manifest)?;
    let plan = stratified_folds(&corpus, manifest.k, manifest.seed)?;
    Ok(Inputs {
        corpus,
        embeddings,
        plan,
    })
}

fn load_aligned(manifest: &RunManifest) -> Result<(Corpus, EmbeddingMatrix)> {
    let ds = &manifest.dataset;
    let corpus = load_corpus(&ds.path, ds.corpus_format())?;
    let embeddings = read_embeddings(&ds.embeddings)?.align(&corpus.ids())?;
    Ok((corpus, embeddings))
}

/// Documents, embeddings and labels of one subset of the corpus.
struct Subset {
    docs: Vec<Document>,
    x: EmbeddingMatrix,
    y: Vec<usize>,
}

impl Subset {
    fn new(inputs: &Inputs, labels: &[usize], indices: &[usize]) -> Result<Self> {
        let docs = inputs.corpus.select(indices);
        let ids: Vec<&str> = docs.iter().map(|d| d.id.as_str()).collect();
        Ok(Self {
            x: inputs.embeddings.align(&ids)?,
            y: indices.iter().map(|&i| labels[i]).collect(),
            docs,
        })
    }
}

struct FoldData {
    train: Subset,
    validation: Subset,
    test: Subset,
}

fn fold_data(inputs: &Inputs, manifest: &RunManifest, fold: usize) -> Result<FoldData> {
    let labels = inputs.corpus.labels()?;
    let s = split(
        &inputs.corpus,
        &inputs.plan,
        fold,
        manifest.validation_fraction,
    )?;
    Ok(FoldData {
        train: Subset::new(inputs, &labels, &s.train)?,
        validation: Subset::new(inputs, &labels, &s.validation)?,
        test: Subset::new(inputs, &labels, &s.test)?,
    })
}

/// Seconds charged per fold for building document representations.
fn representation_seconds(manifest: &RunManifest, n_docs: usize) -> f64 {
    match (manifest.clock.representation_seconds, manifest.clock.mode) {
        (Some(s), _) => s,
        (None, ClockMode::Virtual) => n_docs as f64 * manifest.clock.rates.representation_s_per_doc,
        (None, ClockMode::Monotonic) => 0.0,
    }
}

fn fit(
    manifest: &RunManifest,
    clock: &Clock,
    data: &Subset,
    n_classes: usize,
) -> Result<(CalibratedModel, f64)> {
    let (model, seconds) = clock.time(Phase::ClassifierTraining, data.docs.len(), || {
        train(&data.x, &data.y, n_classes, &manifest.train)
    });
    Ok((model?, seconds))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn write_manifest_copy(manifest: &RunManifest) -> Result<()> {
    create_dir(&manifest.output_dir)?;
    write_file(
        &manifest.output_dir.join("manifest.toml"),
        manifest.to_toml()?,
    )
}

pub fn model_path(output_dir: &Path, fold: usize) -> PathBuf {
    output_dir.join("models").join(format!("fold{fold}.cglr"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedFold {
    pub fold: usize,
    pub path: PathBuf,
    pub iterations: usize,
    pub objective: f64,
    pub converged: bool,
    pub seconds: f64,
}

/// Train one model per fold on its training split and write it to
/// `models/fold{i}.cglr` under the output directory.
pub fn cmd_train(manifest: &RunManifest) -> Result<Vec<TrainedFold>> {
    let inputs = load_inputs(manifest)?;
    let clock = manifest.clock.clock();
    let ledger = CostLedger::new();
    write_manifest_copy(manifest)?;
    create_dir(&manifest.output_dir.join("models"))?;
    let mut out = Vec::with_capacity(manifest.k);
    for fold in 0..manifest.k {
        let trained = (|| {
            let data = fold_data(&inputs, manifest, fold)?;
            let (model, seconds) = fit(manifest, &clock, &data.train, inputs.corpus.num_classes())?;
            ledger.record(Phase::ClassifierTraining, fold, seconds)?;
            let path = model_path(&manifest.output_dir, fold);
            write_model(&model, &path)?;
            let meta = model.meta();
            Ok(TrainedFold {
                fold,
                path,
                iterations: meta.iterations,
                objective: meta.objective,
                converged: meta.converged,
                seconds,
            })
        })()
        .map_err(|e: Error| e.in_fold(fold))?;
        log::info!("fold {fold}: trained in {} iterations", trained.iterations);
        out.push(trained);
    }
    write_file(
        &manifest.output_dir.join("models").join("training.csv"),
        report::training_csv(&out),
    )?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TTestRow {
    pub method_a: String,
    pub method_b: String,
    /// Formatted statistic; `inf` when the differences are constant.
    pub t: String,
    pub critical: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostRow {
    pub dataset: String,
    pub method: String,
    pub per_fold_seconds: Vec<f64>,
    pub total_seconds: f64,
    pub dollars: f64,
    pub co2_kg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditSummary {
    pub per_fold: Vec<RoutedSubsetReport>,
    /// Computed over the outcomes of all folds together.
    pub pooled: RoutedSubsetReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSummary {
    pub per_fold: Vec<f64>,
    /// Most frequent per-fold threshold (smallest on ties).
    pub mode: f64,
    /// Validation tables; empty when the threshold was fixed.
    pub tables: Vec<Vec<ThresholdScore>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationResults {
    pub dataset: String,
    pub classes: Vec<String>,
    pub k: usize,
    pub seed: u64,
    pub alpha: f64,
    pub clock: ClockMode,
    pub cost_model: CostModel,
    pub effectiveness: Vec<FoldScores>,
    pub ttests: Vec<TTestRow>,
    pub costs: Vec<CostRow>,
    pub audit: Option<AuditSummary>,
    pub thresholds: Option<ThresholdSummary>,
}

struct FoldRun {
    scores: Vec<(Method, f64)>,
    threshold: Option<(f64, Vec<ThresholdScore>)>,
    outcomes: Vec<RoutingOutcome>,
    test_labels: Vec<usize>,
}

fn run_fold(
    manifest: &RunManifest,
    inputs: &Inputs,
    fold: usize,
    gateway: &Gateway,
    tuning_gateway: &Gateway,
    ledgers: &BTreeMap<Method, CostLedger>,
) -> Result<FoldRun> {
    let clock = manifest.clock.clock();
    let classes = inputs.corpus.classes();
    let n_classes = classes.len();
    let data = fold_data(inputs, manifest, fold)?;
    let test = &data.test;
    let repr = representation_seconds(manifest, inputs.corpus.len());
    let (model, train_s) = fit(manifest, &clock, &data.train, n_classes)?;
    let record = |method: Method, phase: Phase, s: f64| -> Result<()> {
        match ledgers.get(&method) {
            Some(l) => l.record(phase, fold, s),
            None => Ok(()),
        }
    };

    let mut scores = Vec::new();
    let mut threshold = None;
    let mut outcomes = Vec::new();
    for &method in &manifest.methods {
        match method {
            Method::Local => {
                let (probs, s) = predict(&model, &test.x, &test.docs, classes, &clock)?;
                let pred: Vec<usize> = probs.iter().map(|p| p.argmax).collect();
                scores.push((method, macro_f1(&test.y, &pred, n_classes)?));
                record(method, Phase::Representation, repr)?;
                record(method, Phase::ClassifierTraining, train_s)?;
                record(method, Phase::Prediction, s)?;
            }
            Method::Cascade => {
                let (t, tuning_s, table) = match manifest.router.threshold {
                    Some(t) => (t, 0.0, Vec::new()),
                    None => {
                        let v = &data.validation;
                        let r = tune_threshold(
                            &model,
                            &v.x,
                            &v.docs,
                            &v.y,
                            classes,
                            &manifest.router.grid,
                            &manifest.router_config(1.0),
                            tuning_gateway,
                            &clock,
                        )?;
                        (r.best_threshold, r.seconds, r.table)
                    }
                };
                let config = manifest.router_config(t);
                let report = route(
                    &model, &test.x, &test.docs, classes, &config, gateway, &clock,
                )?;
                scores.push((
                    method,
                    macro_f1(&test.y, &report.final_labels(), n_classes)?,
                ));
                record(method, Phase::Representation, repr)?;
                record(method, Phase::ClassifierTraining, train_s)?;
                record(method, Phase::ThresholdTuning, tuning_s)?;
                record(method, Phase::LlmPrompting, report.llm_seconds)?;
                record(method, Phase::Prediction, report.prediction_seconds)?;
                threshold = Some((t, table));
                outcomes = report.outcomes;
            }
            Method::Llm => {
                let (probs, _) = predict(&model, &test.x, &test.docs, classes, &clock)?;
                let all: Vec<usize> = (0..test.docs.len()).collect();
                let config = manifest.router_config(1.0);
                let (verdicts, llm_s) =
                    ask_llm(&all, &test.docs, classes, &config, gateway, &clock)?;
                let slots: Vec<Option<LlmVerdict>> = verdicts.into_iter().map(Some).collect();
                let routed = assemble(
                    &test.docs,
                    &probs,
                    slots,
                    f64::INFINITY,
                    config.unparsed_policy,
                )?;
                let pred: Vec<usize> = routed.iter().map(|o| o.final_label).collect();
                scores.push((method, macro_f1(&test.y, &pred, n_classes)?));
                record(method, Phase::LlmPrompting, llm_s)?;
            }
        }
    }
    Ok(FoldRun {
        scores,
        threshold,
        outcomes,
        test_labels: test.y.clone(),
    })
}

/// Most frequent value; the smallest wins ties.
fn mode(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut best = (sorted[0], 0);
    let mut i = 0;
    while i < sorted.len() {
        let j = sorted[i..].iter().take_while(|v| **v == sorted[i]).count();
        if j > best.1 {
            best = (sorted[i], j);
        }
        i += j;
    }
    best.0
}

/// Run the full protocol: per fold, train, tune the threshold on the
/// validation split, route the test fold and score every method. Writes the
/// report bundle to the output directory.
pub fn cmd_evaluate(manifest: &RunManifest) -> Result<EvaluationResults> {
    let inputs = load_inputs(manifest)?;
    let gateway = Gateway::from_config(&manifest.backend)?;
    let tuning_gateway = match &manifest.tuning_backend {
        Some(cfg) => Gateway::from_config(cfg)?,
        None => gateway.clone(),
    };
    let ledgers: BTreeMap<Method, CostLedger> = manifest
        .methods
        .iter()
        .map(|&m| (m, CostLedger::new()))
        .collect();

    let mut runs = Vec::with_capacity(manifest.k);
    for fold in 0..manifest.k {
        let run = run_fold(manifest, &inputs, fold, &gateway, &tuning_gateway, &ledgers)
            .map_err(|e| e.in_fold(fold))?;
        log::info!("fold {fold}: {:?}", run.scores);
        runs.push(run);
    }

    let mut effectiveness = Vec::new();
    for (m_idx, &method) in manifest.methods.iter().enumerate() {
        let per_fold: Vec<f64> = runs.iter().map(|r| r.scores[m_idx].1).collect();
        effectiveness.push(fold_summary(method.as_str(), &per_fold)?);
    }
    let mut ttests = Vec::new();
    for (i, a) in effectiveness.iter().enumerate() {
        for b in &effectiveness[i + 1..] {
            let t = paired_t_test(&a.folds, &b.folds, manifest.alpha)?;
            ttests.push(TTestRow {
                method_a: a.method.clone(),
                method_b: b.method.clone(),
                t: format!("{:.3}", t.t),
                critical: t.critical,
                verdict: t.verdict,
            });
        }
    }
    let costs = ledgers
        .iter()
        .map(|(method, ledger)| {
            let totals = ledger.totals();
            CostRow {
                dataset: manifest.dataset.name.clone(),
                method: method.as_str().to_string(),
                per_fold_seconds: totals.per_fold.values().copied().collect(),
                total_seconds: totals.total,
                dollars: dollars(totals.total, &manifest.cost),
                co2_kg: co2_kg(totals.total, &manifest.cost),
            }
        })
        .collect();

    let n_classes = inputs.corpus.num_classes();
    let (audit_summary, thresholds) = if manifest.methods.contains(&Method::Cascade) {
        let per_fold = runs
            .iter()
            .map(|r| audit(&r.outcomes, &r.test_labels, n_classes))
            .collect::<Result<Vec<_>>>()?;
        let all_outcomes: Vec<RoutingOutcome> = runs
            .iter()
            .flat_map(|r| r.outcomes.iter().cloned())
            .collect();
        let all_labels: Vec<usize> = runs
            .iter()
            .flat_map(|r| r.test_labels.iter().copied())
            .collect();
        let pooled = audit(&all_outcomes, &all_labels, n_classes)?;
        let chosen: Vec<(f64, Vec<ThresholdScore>)> = runs
            .iter()
            .map(|r| r.threshold.clone().expect("cascade ran"))
            .collect();
        let per_fold_t: Vec<f64> = chosen.iter().map(|c| c.0).collect();
        let tables: Vec<Vec<ThresholdScore>> = if manifest.router.threshold.is_some() {
            Vec::new()
        } else {
            chosen.into_iter().map(|c| c.1).collect()
        };
        (
            Some(AuditSummary { per_fold, pooled }),
            Some(ThresholdSummary {
                mode: mode(&per_fold_t),
                per_fold: per_fold_t,
                tables,
            }),
        )
    } else {
        (None, None)
    };

    let results = EvaluationResults {
        dataset: manifest.dataset.name.clone(),
        classes: inputs.corpus.classes().to_vec(),
        k: manifest.k,
        seed: manifest.seed,
        alpha: manifest.alpha,
        clock: manifest.clock.mode,
        cost_model: manifest.cost,
        effectiveness,
        ttests,
        costs,
        audit: audit_summary,
        thresholds,
    };

    write_manifest_copy(manifest)?;
    let out = &manifest.output_dir;
    if manifest.methods.contains(&Method::Cascade) {
        let dir = out.join("outcomes");
        create_dir(&dir)?;
        for (fold, run) in runs.iter().enumerate() {
            let mut buf = Vec::new();
            write_outcomes_jsonl(&run.outcomes, inputs.corpus.classes(), &mut buf)
                .expect("writing to memory");
            write_file(&dir.join(format!("fold{fold}.jsonl")), buf)?;
        }
    }
    write_results(&results, out)?;
    Ok(results)
}

/// Write `results.json` and every rendered table into `dir`.
pub fn write_results(results: &EvaluationResults, dir: &Path) -> Result<()> {
    create_dir(dir)?;
    let json = serde_json::to_string_pretty(results).expect("serializable results");
    write_file(&dir.join("results.json"), json + "\n")?;
    report::write_tables(results, dir)
}

pub fn read_results(path: &Path) -> Result<EvaluationResults> {
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&raw).map_err(|e| Error::MalformedRecord {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })
}

/// Re-render the tables of a finished evaluation, writing them next to
/// `results.json` (or into `out_dir`), and return the text report.
pub fn cmd_report(results_path: &Path, out_dir: Option<&Path>) -> Result<String> {
    let results = read_results(results_path)?;
    let dir = out_dir.map(Path::to_path_buf).unwrap_or_else(|| {
        results_path
            .parent()
            .unwrap_or(Path::new("."))
            .to_path_buf()
    });
    create_dir(&dir)?;
    report::write_tables(&results, &dir)?;
    Ok(report::render_text(&results))
}

/// One row of the fold-averaged sweep series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub threshold: f64,
    pub macro_f1: f64,
    pub instances_sent: f64,
    pub pct: f64,
    pub total_time_s: f64,
}

/// Evaluate the cascade at every grid threshold on each test fold and
/// average the series over folds. Writes `sweep.csv`, `sweep.txt` and the
/// per-fold series under `sweep/`.
pub fn cmd_sweep(manifest: &RunManifest) -> Result<Vec<SweepRow>> {
    let inputs = load_inputs(manifest)?;
    let gateway = Gateway::from_config(&manifest.backend)?;
    let clock = manifest.clock.clock();
    let classes = inputs.corpus.classes();
    let grid = &manifest.router.grid;
    let config = manifest.router_config(grid[0]);
    let dir = manifest.output_dir.join("sweep");
    create_dir(&dir)?;
    write_manifest_copy(manifest)?;

    let mut sums = vec![[0.0f64; 4]; grid.len()];
    for fold in 0..manifest.k {
        let points = (|| {
            let data = fold_data(&inputs, manifest, fold)?;
            let (model, train_s) = fit(manifest, &clock, &data.train, classes.len())?;
            let base = representation_seconds(manifest, inputs.corpus.len()) + train_s;
            let t = &data.test;
            sweep(
                &model, &t.x, &t.docs, &t.y, classes, grid, &config, &gateway, &clock, base,
            )
        })()
        .map_err(|e: Error| e.in_fold(fold))?;
        let mut buf = Vec::new();
        write_sweep_csv(&points, &mut buf)?;
        write_file(&dir.join(format!("fold{fold}.csv")), buf)?;
        for (acc, p) in sums.iter_mut().zip(&points) {
            acc[0] += p.macro_f1;
            acc[1] += p.instances_sent as f64;
            acc[2] += p.pct;
            acc[3] += p.total_time_s;
        }
    }
    let k = manifest.k as f64;
    let rows: Vec<SweepRow> = grid
        .iter()
        .zip(&sums)
        .map(|(&threshold, acc)| SweepRow {
            threshold,
            macro_f1: acc[0] / k,
            instances_sent: acc[1] / k,
            pct: acc[2] / k,
            total_time_s: acc[3] / k,
        })
        .collect();
    write_file(
        &manifest.output_dir.join("sweep.csv"),
        report::sweep_csv(&rows),
    )?;
    write_file(
        &manifest.output_dir.join("sweep.txt"),
        report::sweep_text(&rows),
    )?;
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteSummary {
    pub documents: usize,
    pub sent: usize,
    pub threshold: f64,
    /// Present when every document is labeled.
    pub audit: Option<RoutedSubsetReport>,
}

/// Route every corpus document with a trained model and write the
/// outcomes as JSONL to `out`.
pub fn cmd_route(manifest: &RunManifest, model: &Path, out: &Path) -> Result<RouteSummary> {
    manifest.validate()?;
    let threshold = manifest
        .router
        .threshold
        .ok_or_else(|| Error::Config("route needs a threshold".into()))?;
    let model = read_model(model)?;
    let (corpus, embeddings) = load_aligned(manifest)?;
    let gateway = Gateway::from_config(&manifest.backend)?;
    let clock = manifest.clock.clock();
    let report = route(
        &model,
        &embeddings,
        corpus.documents(),
        corpus.classes(),
        &manifest.router_config(threshold),
        &gateway,
        &clock,
    )?;
    let mut buf = Vec::new();
    write_outcomes_jsonl(&report.outcomes, corpus.classes(), &mut buf).expect("writing to memory");
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    write_file(out, buf)?;
    let audit = match corpus.labels() {
        Ok(labels) => Some(audit(&report.outcomes, &labels, corpus.num_classes())?),
        Err(_) => None,
    };
    Ok(RouteSummary {
        documents: corpus.len(),
        sent: report.instances_sent(),
        threshold,
        audit,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CassetteSource {
    /// Answer every prompt with the document's true class.
    Gold,
    /// Answer every prompt with a wrong class.
    Inverted,
    /// Ask the configured backend and store what it says.
    Record,
}

/// Build a cassette covering the prompt of every corpus document under the
/// manifest's template. Returns the number of entries written.
pub fn cmd_export_cassette(
    manifest: &RunManifest,
    source: CassetteSource,
    latency_s: f64,
    out: &Path,
) -> Result<usize> {
    manifest.validate()?;
    if !(latency_s >= 0.0) || !latency_s.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "latency must be non-negative, got {latency_s}"
        )));
    }
    let ds = &manifest.dataset;
    let corpus = load_corpus(&ds.path, ds.corpus_format())?;
    let classes = corpus.classes();
    manifest.template.validate(classes)?;
    let mut prompts = Vec::new();
    for doc in corpus.documents() {
        match manifest.template.render(classes, &doc.text) {
            Ok(p) => prompts.push((doc, p)),
            Err(e) => log::warn!("skipping document {}: {e}", doc.id),
        }
    }
    let mut cassette = Cassette::new();
    match source {
        CassetteSource::Gold | CassetteSource::Inverted => {
            for (doc, prompt) in &prompts {
                let label = doc.label.ok_or_else(|| Error::Unlabeled(doc.id.clone()))?;
                let answer = match source {
                    CassetteSource::Gold => label,
                    _ => (label + 1) % classes.len(),
                };
                cassette.insert(CassetteEntry {
                    prompt_sha256: prompt_sha256(prompt),
                    completion: format!(" {}.", classes[answer]),
                    latency_s: Some(latency_s),
                })?;
            }
        }
        CassetteSource::Record => {
            let gateway = Gateway::from_config(&manifest.backend)?;
            let items: Vec<(String, String)> = prompts
                .iter()
                .map(|(d, p)| (d.id.clone(), p.clone()))
                .collect();
            let batch = gateway.classify_batch(&items, classes);
            for ((_, prompt), verdict) in items.iter().zip(batch.verdicts) {
                if let Some(err) = verdict.error {
                    log::warn!("not recording document {}: {err}", verdict.id);
                    continue;
                }
                cassette.insert(CassetteEntry {
                    prompt_sha256: prompt_sha256(prompt),
                    completion: verdict.raw_completion,
                    latency_s: Some(verdict.latency_s),
                })?;
            }
        }
    }
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    cassette.save(out)?;
    Ok(cassette.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_prefers_frequent_then_smallest() {
        assert_eq!(mode(&[0.95, 0.99, 0.95]), 0.95);
        assert_eq!(mode(&[0.99, 0.95]), 0.95);
        assert_eq!(mode(&[0.99, 0.99, 0.5]), 0.99);
    }
}
