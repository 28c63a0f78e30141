//! Confidence-gated routing between the local classifier and the LLM.
//!
//! A document whose top class probability is strictly below the threshold
//! goes to the LLM; everything else keeps the local prediction. Unparseable
//! LLM answers fall back to the local label unless the policy says to fail.

mod audit;
mod sweep;
mod tune;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::classifier::{CalibratedModel, ProbabilityVector};
use crate::corpus::Document;
use crate::cost::{Clock, Phase};
use crate::embed_store::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::llm::{Gateway, LlmVerdict, PromptTemplate};

pub use audit::{audit, RoutedSubsetReport};
pub use sweep::{sweep, write_sweep_csv, SweepPoint};
pub use tune::{default_grid, tune_threshold, validate_grid, ThresholdScore, TuningResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Route {
    Local,
    Llm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnparsedPolicy {
    #[default]
    FallbackLocal,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouterConfig {
    pub threshold: f64,
    #[serde(default)]
    pub unparsed_policy: UnparsedPolicy,
    #[serde(default)]
    pub template: PromptTemplate,
}

impl RouterConfig {
    pub fn new(threshold: f64) -> Self {
        Self {
            threshold,
            unparsed_policy: UnparsedPolicy::default(),
            template: PromptTemplate::default(),
        }
    }

    pub fn with_threshold(&self, threshold: f64) -> Self {
        Self {
            threshold,
            ..self.clone()
        }
    }
}

pub(crate) fn check_threshold(t: f64) -> Result<()> {
    if t > 0.0 && t <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "threshold must lie in (0, 1], got {t}"
        )))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutingOutcome {
    pub id: String,
    pub confidence: f64,
    pub route: Route,
    pub local_label: usize,
    pub llm_verdict: Option<LlmVerdict>,
    pub final_label: usize,
}

#[derive(Debug, Clone)]
pub struct RouteReport {
    pub outcomes: Vec<RoutingOutcome>,
    pub prediction_seconds: f64,
    pub llm_seconds: f64,
}

impl RouteReport {
    pub fn instances_sent(&self) -> usize {
        self.outcomes
            .iter()
            .filter(|o| o.route == Route::Llm)
            .count()
    }

    pub fn final_labels(&self) -> Vec<usize> {
        self.outcomes.iter().map(|o| o.final_label).collect()
    }
}

/// Route every document in `docs` (aligned row-for-row with `embeddings`).
pub fn route(
    model: &CalibratedModel,
    embeddings: &EmbeddingMatrix,
    docs: &[Document],
    classes: &[String],
    config: &RouterConfig,
    gateway: &Gateway,
    clock: &Clock,
) -> Result<RouteReport> {
    check_threshold(config.threshold)?;
    let (probs, prediction_seconds) = predict(model, embeddings, docs, classes, clock)?;
    let routed: Vec<usize> = (0..docs.len())
        .filter(|&i| probs[i].confidence < config.threshold)
        .collect();
    let (verdicts, llm_seconds) = ask_llm(&routed, docs, classes, config, gateway, clock)?;
    let mut slot = vec![None; docs.len()];
    for (i, v) in routed.into_iter().zip(verdicts) {
        slot[i] = Some(v);
    }
    let outcomes = assemble(docs, &probs, slot, config.threshold, config.unparsed_policy)?;
    Ok(RouteReport {
        outcomes,
        prediction_seconds,
        llm_seconds,
    })
}

/// Class probabilities for aligned documents, with the prediction time.
pub(crate) fn predict(
    model: &CalibratedModel,
    embeddings: &EmbeddingMatrix,
    docs: &[Document],
    classes: &[String],
    clock: &Clock,
) -> Result<(Vec<ProbabilityVector>, f64)> {
    if embeddings.len() != docs.len() {
        return Err(Error::LengthMismatch {
            left: embeddings.len(),
            right: docs.len(),
        });
    }
    if let Some((row_id, doc)) = embeddings
        .ids()
        .iter()
        .zip(docs)
        .find(|(id, d)| **id != d.id)
    {
        return Err(Error::InvalidArgument(format!(
            "embedding row `{row_id}` does not line up with document `{}`",
            doc.id
        )));
    }
    if model.n_classes() != classes.len() {
        return Err(Error::InvalidArgument(format!(
            "model has {} classes, corpus has {}",
            model.n_classes(),
            classes.len()
        )));
    }
    let (probs, seconds) = clock.time(Phase::Prediction, docs.len(), || {
        model.predict_proba(embeddings)
    });
    Ok((probs?, seconds))
}

/// Query the LLM for the documents at `indices`; verdicts come back in the
/// same order.
pub(crate) fn ask_llm(
    indices: &[usize],
    docs: &[Document],
    classes: &[String],
    config: &RouterConfig,
    gateway: &Gateway,
    clock: &Clock,
) -> Result<(Vec<LlmVerdict>, f64)> {
    if indices.is_empty() {
        return Ok((Vec::new(), 0.0));
    }
    config.template.validate(classes)?;
    let mut items = Vec::new();
    let mut unsent = Vec::new();
    for (k, &i) in indices.iter().enumerate() {
        let doc = &docs[i];
        match config.template.render(classes, &doc.text) {
            Ok(prompt) => items.push((doc.id.clone(), prompt)),
            Err(e) => unsent.push((k, LlmVerdict::unsent(doc.id.clone(), e.to_string()))),
        }
    }
    let batch = gateway.classify_batch(&items, classes);
    let seconds = clock.batch_seconds(&batch, gateway.max_concurrent());
    let mut sent = batch.verdicts.into_iter();
    let mut unsent = unsent.into_iter().peekable();
    let verdicts = (0..indices.len())
        .map(|k| match unsent.peek() {
            Some((pos, _)) if *pos == k => unsent.next().expect("peeked").1,
            _ => sent.next().expect("one verdict per sent prompt"),
        })
        .collect();
    Ok((verdicts, seconds))
}

/// Build outcomes from probabilities and the LLM verdicts available for
/// each document (`verdicts[i]` must be present whenever document `i`
/// falls below `threshold`).
pub(crate) fn assemble(
    docs: &[Document],
    probs: &[ProbabilityVector],
    mut verdicts: Vec<Option<LlmVerdict>>,
    threshold: f64,
    policy: UnparsedPolicy,
) -> Result<Vec<RoutingOutcome>> {
    let mut outcomes = Vec::with_capacity(docs.len());
    for (i, (doc, p)) in docs.iter().zip(probs).enumerate() {
        let local_label = p.argmax;
        if p.confidence < threshold {
            let verdict = verdicts[i]
                .take()
                .expect("verdict for every routed document");
            let final_label = match (verdict.parsed_label, policy) {
                (Some(label), _) => label,
                (None, UnparsedPolicy::FallbackLocal) => local_label,
                (None, UnparsedPolicy::Error) => {
                    return Err(Error::Backend {
                        id: doc.id.clone(),
                        completed: i,
                        message: verdict.error.unwrap_or_else(|| {
                            format!("unparsed completion {:?}", verdict.raw_completion)
                        }),
                    })
                }
            };
            outcomes.push(RoutingOutcome {
                id: doc.id.clone(),
                confidence: p.confidence,
                route: Route::Llm,
                local_label,
                llm_verdict: Some(verdict),
                final_label,
            });
        } else {
            outcomes.push(RoutingOutcome {
                id: doc.id.clone(),
                confidence: p.confidence,
                route: Route::Local,
                local_label,
                llm_verdict: None,
                final_label: local_label,
            });
        }
    }
    Ok(outcomes)
}

/// One line of the per-document outcome export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRecord {
    pub id: String,
    pub confidence: f64,
    pub route: Route,
    pub local_label: String,
    pub llm_label: Option<String>,
    pub final_label: String,
    pub latency: Option<f64>,
}

impl OutcomeRecord {
    pub fn new(outcome: &RoutingOutcome, classes: &[String]) -> Self {
        let verdict = outcome.llm_verdict.as_ref();
        Self {
            id: outcome.id.clone(),
            confidence: outcome.confidence,
            route: outcome.route,
            local_label: classes[outcome.local_label].clone(),
            llm_label: verdict
                .and_then(|v| v.parsed_label)
                .map(|l| classes[l].clone()),
            final_label: classes[outcome.final_label].clone(),
            latency: verdict.map(|v| v.latency_s),
        }
    }
}

pub fn write_outcomes_jsonl<W: Write>(
    outcomes: &[RoutingOutcome],
    classes: &[String],
    mut out: W,
) -> std::io::Result<()> {
    for o in outcomes {
        serde_json::to_writer(&mut out, &OutcomeRecord::new(o, classes))?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
