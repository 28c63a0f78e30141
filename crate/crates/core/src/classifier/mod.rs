//! Multinomial logistic regression on embeddings, used as the calibrated
//! first stage of the cascade.

mod calibration;
mod persist;
mod train;

use serde::{Deserialize, Serialize};

use crate::embed_store::EmbeddingMatrix;
use crate::error::{Error, Result};

pub use calibration::{expected_calibration_error, reliability_bins, ReliabilityBin};
pub use persist::{read_model, write_model, MODEL_MAGIC, MODEL_VERSION};
pub use train::{objective_and_gradient, train, train_traced, TrainConfig, STD_FLOOR};

/// Per-dimension standardization fitted on the training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl FeatureScaler {
    pub fn apply(&self, row: &[f32], out: &mut [f64]) {
        for (j, (&v, o)) in row.iter().zip(out.iter_mut()).enumerate() {
            *o = (f64::from(v) - self.mean[j]) / self.std[j];
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub iterations: usize,
    pub objective: f64,
    pub lambda: f64,
    /// False when `max_iter` ran out before the gradient norm fell below tol.
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibratedModel {
    pub(crate) n_classes: usize,
    pub(crate) dim: usize,
    /// Row-major `n_classes × dim`.
    pub(crate) weights: Vec<f64>,
    pub(crate) bias: Vec<f64>,
    pub(crate) scaler: FeatureScaler,
    pub(crate) meta: TrainingMeta,
}

/// Class probabilities for one input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityVector {
    pub probs: Vec<f64>,
    /// Most probable class, lowest index on ties.
    pub argmax: usize,
    /// Largest class probability.
    pub confidence: f64,
}

impl ProbabilityVector {
    pub fn from_probs(probs: Vec<f64>) -> Self {
        let mut argmax = 0;
        for (c, &p) in probs.iter().enumerate() {
            if p > probs[argmax] {
                argmax = c;
            }
        }
        let confidence = probs[argmax];
        Self {
            probs,
            argmax,
            confidence,
        }
    }
}

impl CalibratedModel {
    /// Assemble a model from explicit parameters. `weights` is row-major
    /// `n_classes × dim`.
    pub fn from_parts(
        weights: Vec<f64>,
        bias: Vec<f64>,
        scaler: FeatureScaler,
        meta: TrainingMeta,
    ) -> Result<Self> {
        let n_classes = bias.len();
        let dim = scaler.mean.len();
        if n_classes < 2 {
            return Err(Error::InvalidArgument(
                "model needs at least two classes".into(),
            ));
        }
        if weights.len() != n_classes * dim {
            return Err(Error::DimensionMismatch {
                expected: n_classes * dim,
                found: weights.len(),
            });
        }
        if scaler.std.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: scaler.std.len(),
            });
        }
        if scaler.std.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::InvalidArgument("scaler std must be positive".into()));
        }
        Ok(Self {
            n_classes,
            dim,
            weights,
            bias,
            scaler,
            meta,
        })
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn scaler(&self) -> &FeatureScaler {
        &self.scaler
    }

    pub fn meta(&self) -> &TrainingMeta {
        &self.meta
    }

    /// Class logits for an already standardized row.
    pub(crate) fn logits(&self, x: &[f64], out: &mut [f64]) {
        for (c, o) in out.iter_mut().enumerate() {
            let w = &self.weights[c * self.dim..(c + 1) * self.dim];
            *o = self.bias[c] + w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        }
    }

    pub fn predict_row(&self, row: &[f32]) -> Result<ProbabilityVector> {
        if row.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: row.len(),
            });
        }
        let mut x = vec![0.0; self.dim];
        self.scaler.apply(row, &mut x);
        let mut z = vec![0.0; self.n_classes];
        self.logits(&x, &mut z);
        softmax_in_place(&mut z);
        Ok(ProbabilityVector::from_probs(z))
    }

    pub fn predict_proba(&self, x: &EmbeddingMatrix) -> Result<Vec<ProbabilityVector>> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.dim(),
            });
        }
        x.rows().map(|row| self.predict_row(row)).collect()
    }
}

pub(crate) fn softmax_in_place(z: &mut [f64]) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in z.iter_mut() {
        *v /= sum;
    }
}
