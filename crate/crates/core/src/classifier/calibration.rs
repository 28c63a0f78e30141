use serde::{Deserialize, Serialize};

use super::ProbabilityVector;
use crate::error::{Error, Result};

/// One equal-width confidence bin of a reliability diagram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    pub mean_confidence: f64,
    pub accuracy: f64,
}

/// Bins `[i/bins, (i+1)/bins)`, the last one closed at 1.0. Empty bins are
/// kept with zero count.
pub fn reliability_bins(
    probs: &[ProbabilityVector],
    y: &[usize],
    bins: usize,
) -> Result<Vec<ReliabilityBin>> {
    if bins == 0 {
        return Err(Error::InvalidArgument("bins must be at least 1".into()));
    }
    if probs.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: probs.len(),
            right: y.len(),
        });
    }
    let mut count = vec![0usize; bins];
    let mut conf = vec![0.0; bins];
    let mut correct = vec![0usize; bins];
    for (p, &label) in probs.iter().zip(y) {
        let b = ((p.confidence * bins as f64) as usize).min(bins - 1);
        count[b] += 1;
        conf[b] += p.confidence;
        correct[b] += usize::from(p.argmax == label);
    }
    Ok((0..bins)
        .map(|b| {
            let n = count[b].max(1) as f64;
            ReliabilityBin {
                lower: b as f64 / bins as f64,
                upper: (b + 1) as f64 / bins as f64,
                count: count[b],
                mean_confidence: conf[b] / n,
                accuracy: correct[b] as f64 / n,
            }
        })
        .collect())
}

/// Expected calibration error: `Σ_b (n_b / n) · |acc_b − conf_b|`.
pub fn expected_calibration_error(
    probs: &[ProbabilityVector],
    y: &[usize],
    bins: usize,
) -> Result<f64> {
    let table = reliability_bins(probs, y, bins)?;
    let n = probs.len();
    if n == 0 {
        return Ok(0.0);
    }
    Ok(table
        .iter()
        .filter(|b| b.count > 0)
        .map(|b| b.count as f64 / n as f64 * (b.accuracy - b.mean_confidence).abs())
        .sum())
}
