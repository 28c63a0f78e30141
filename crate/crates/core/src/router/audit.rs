use serde::{Deserialize, Serialize};

use super::{Route, RoutingOutcome};
use crate::error::{Error, Result};
use crate::metrics::macro_f1;

/// Cascade quality on the documents the LLM answered versus those kept
/// local. Subset scores are `None` when the subset is empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutedSubsetReport {
    pub total: usize,
    pub routed: usize,
    pub routed_pct: f64,
    pub routed_macro_f1: Option<f64>,
    pub local_macro_f1: Option<f64>,
    pub overall_macro_f1: f64,
}

pub fn audit(
    outcomes: &[RoutingOutcome],
    labels: &[usize],
    n_classes: usize,
) -> Result<RoutedSubsetReport> {
    if outcomes.is_empty() {
        return Err(Error::EmptyInput);
    }
    if labels.len() != outcomes.len() {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: outcomes.len(),
        });
    }
    let subset = |route: Route| -> Result<Option<f64>> {
        let (gold, pred): (Vec<usize>, Vec<usize>) = outcomes
            .iter()
            .zip(labels)
            .filter(|(o, _)| o.route == route)
            .map(|(o, &l)| (l, o.final_label))
            .unzip();
        if gold.is_empty() {
            Ok(None)
        } else {
            macro_f1(&gold, &pred, n_classes).map(Some)
        }
    };
    let all: Vec<usize> = outcomes.iter().map(|o| o.final_label).collect();
    let routed = outcomes.iter().filter(|o| o.route == Route::Llm).count();
    Ok(RoutedSubsetReport {
        total: outcomes.len(),
        routed,
        routed_pct: 100.0 * routed as f64 / outcomes.len() as f64,
        routed_macro_f1: subset(Route::Llm)?,
        local_macro_f1: subset(Route::Local)?,
        overall_macro_f1: macro_f1(labels, &all, n_classes)?,
    })
}
