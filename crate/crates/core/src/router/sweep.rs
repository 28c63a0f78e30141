use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{route, validate_grid, RouterConfig};
use crate::classifier::CalibratedModel;
use crate::corpus::Document;
use crate::cost::Clock;
use crate::embed_store::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::llm::Gateway;
use crate::metrics::macro_f1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub threshold: f64,
    pub macro_f1: f64,
    pub instances_sent: usize,
    pub pct: f64,
    /// `base_seconds` plus prediction and LLM time at this threshold.
    pub total_time_s: f64,
}

/// Route the same documents once per grid threshold.
#[allow(clippy::too_many_arguments)]
pub fn sweep(
    model: &CalibratedModel,
    embeddings: &EmbeddingMatrix,
    docs: &[Document],
    labels: &[usize],
    classes: &[String],
    grid: &[f64],
    config: &RouterConfig,
    gateway: &Gateway,
    clock: &Clock,
    base_seconds: f64,
) -> Result<Vec<SweepPoint>> {
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
    grid.iter()
        .map(|&t| {
            let report = route(
                model,
                embeddings,
                docs,
                classes,
                &config.with_threshold(t),
                gateway,
                clock,
            )?;
            let sent = report.instances_sent();
            Ok(SweepPoint {
                threshold: t,
                macro_f1: macro_f1(labels, &report.final_labels(), classes.len())?,
                instances_sent: sent,
                pct: 100.0 * sent as f64 / docs.len() as f64,
                total_time_s: base_seconds + report.prediction_seconds + report.llm_seconds,
            })
        })
        .collect()
}

pub fn write_sweep_csv<W: Write>(points: &[SweepPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::InvalidArgument(format!("writing sweep CSV: {e}"));
    w.write_record([
        "threshold",
        "macro_f1",
        "instances_sent",
        "pct",
        "total_time_s",
    ])
    .map_err(io)?;
    for p in points {
        w.write_record([
            format!("{:.2}", p.threshold),
            format!("{:.4}", p.macro_f1),
            p.instances_sent.to_string(),
            format!("{:.2}", p.pct),
            format!("{:.3}", p.total_time_s),
        ])
        .map_err(io)?;
    }
    w.flush()
        .map_err(|e| Error::InvalidArgument(format!("writing sweep CSV: {e}")))?;
    Ok(())
}
