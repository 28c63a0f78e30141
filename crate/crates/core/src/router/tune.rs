use serde::{Deserialize, Serialize};

use super::{ask_llm, assemble, check_threshold, predict, RouterConfig};
use crate::classifier::CalibratedModel;
use crate::corpus::Document;
use crate::cost::Clock;
use crate::embed_store::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::llm::Gateway;
use crate::metrics::macro_f1;

/// Candidate thresholds 0.50, 0.55, …, 0.95, 0.99.
pub fn default_grid() -> Vec<f64> {
    let mut grid: Vec<f64> = (10..=19).map(|k| k as f64 * 0.05).collect();
    grid.push(0.99);
    grid
}

/// A grid must be non-empty, strictly increasing and inside (0, 1].
pub fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("threshold grid is empty".into()));
    }
    for &t in grid {
        check_threshold(t)?;
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "threshold grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdScore {
    pub threshold: f64,
    pub macro_f1: f64,
    pub instances_sent: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningResult {
    pub best_threshold: f64,
    pub table: Vec<ThresholdScore>,
    /// Prediction plus LLM time spent on the validation documents.
    pub seconds: f64,
}

/// Pick the grid threshold with the highest cascade Macro-F1 on a labeled
/// validation set; ties go to the smallest threshold.
///
/// Every document routed at a lower threshold is also routed at the largest
/// one, so a single LLM batch at the largest threshold serves the whole grid.
#[allow(clippy::too_many_arguments)]
pub fn tune_threshold(
    model: &CalibratedModel,
    embeddings: &EmbeddingMatrix,
    docs: &[Document],
    labels: &[usize],
    classes: &[String],
    grid: &[f64],
    config: &RouterConfig,
    gateway: &Gateway,
    clock: &Clock,
) -> Result<TuningResult> {
    validate_grid(grid)?;
    if docs.is_empty() {
        return Err(Error::EmptyInput);
    }
    if labels.len() != docs.len() {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: docs.len(),
        });
    }
    let t_max = *grid.last().expect("non-empty grid");
    let (probs, prediction_seconds) = predict(model, embeddings, docs, classes, clock)?;
    let routed: Vec<usize> = (0..docs.len())
        .filter(|&i| probs[i].confidence < t_max)
        .collect();
    let (verdicts, llm_seconds) = ask_llm(&routed, docs, classes, config, gateway, clock)?;
    let mut all = vec![None; docs.len()];
    for (i, v) in routed.into_iter().zip(verdicts) {
        all[i] = Some(v);
    }

    let mut table = Vec::with_capacity(grid.len());
    let mut best: Option<(f64, f64)> = None;
    for &t in grid {
        let outcomes = assemble(docs, &probs, all.clone(), t, config.unparsed_policy)?;
        let predicted: Vec<usize> = outcomes.iter().map(|o| o.final_label).collect();
        let score = macro_f1(labels, &predicted, classes.len())?;
        let sent = outcomes
            .iter()
            .filter(|o| o.route == super::Route::Llm)
            .count();
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((t, score));
        }
        table.push(ThresholdScore {
            threshold: t,
            macro_f1: score,
            instances_sent: sent,
        });
    }
    Ok(TuningResult {
        best_threshold: best.expect("non-empty grid").0,
        table,
        seconds: prediction_seconds + llm_seconds,
    })
}
