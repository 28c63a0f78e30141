//! Macro-F1, fold aggregation with confidence intervals, and paired t-tests.

mod stats;

pub use stats::{fold_summary, paired_t_test, t_critical, FoldScores, TTest, Verdict};

use crate::error::{Error, Result};

/// `confusion[t][p]` counts documents of true class `t` predicted as `p`.
pub fn confusion_matrix(
    y_true: &[usize],
    y_pred: &[usize],
    n_classes: usize,
) -> Result<Vec<Vec<usize>>> {
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch {
            left: y_true.len(),
            right: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut m = vec![vec![0usize; n_classes]; n_classes];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        if t >= n_classes || p >= n_classes {
            return Err(Error::InvalidArgument(format!(
                "label {} out of range for {n_classes} classes",
                t.max(p)
            )));
        }
        m[t][p] += 1;
    }
    Ok(m)
}

/// Per-class F1 scores. A class with no true and no predicted members, or
/// with zero precision and recall, scores 0.
pub fn per_class_f1(y_true: &[usize], y_pred: &[usize], n_classes: usize) -> Result<Vec<f64>> {
    let m = confusion_matrix(y_true, y_pred, n_classes)?;
    Ok((0..n_classes)
        .map(|c| {
            let tp = m[c][c];
            let predicted: usize = (0..n_classes).map(|t| m[t][c]).sum();
            let actual: usize = m[c].iter().sum();
            // 2PR/(P+R) = 2tp / (predicted + actual)
            if tp == 0 {
                0.0
            } else {
                2.0 * tp as f64 / (predicted + actual) as f64
            }
        })
        .collect())
}

/// Unweighted mean of per-class F1 over all `n_classes` classes, including
/// classes absent from both label lists.
pub fn macro_f1(y_true: &[usize], y_pred: &[usize], n_classes: usize) -> Result<f64> {
    let f1 = per_class_f1(y_true, y_pred, n_classes)?;
    Ok(f1.iter().sum::<f64>() / n_classes as f64)
}
