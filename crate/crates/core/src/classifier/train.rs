use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{softmax_in_place, CalibratedModel, FeatureScaler, TrainingMeta};
use crate::embed_store::EmbeddingMatrix;
use crate::error::{Error, Result};

/// Lower bound applied to per-dimension standard deviations.
pub const STD_FLOOR: f64 = 1e-8;

const ARMIJO_C: f64 = 1e-4;
const SHRINK: f64 = 0.5;
const MIN_STEP: f64 = 1e-20;
const MAX_STEP: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    /// L2 penalty on the weights (not the bias).
    pub lambda: f64,
    /// Stop once the gradient's largest absolute entry drops below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lambda: 1e-2,
            tol: 1e-6,
            max_iter: 5000,
        }
    }
}

/// Mean cross-entropy plus `lambda/2 * ||W||²`, and its gradient.
///
/// `params` holds the row-major `n_classes × dim` weights followed by the
/// `n_classes` biases; `x` is row-major `n × dim` (already standardized).
pub fn objective_and_gradient(
    params: &[f64],
    x: &[f64],
    y: &[usize],
    n_classes: usize,
    dim: usize,
    lambda: f64,
) -> (f64, Vec<f64>) {
    let n = y.len();
    let n_w = n_classes * dim;
    let (w, b) = params.split_at(n_w);
    let mut grad = vec![0.0; params.len()];
    let mut loss = 0.0;
    let mut z = vec![0.0; n_classes];
    for (i, &yi) in y.iter().enumerate() {
        let row = &x[i * dim..(i + 1) * dim];
        for (c, zc) in z.iter_mut().enumerate() {
            *zc = b[c]
                + w[c * dim..(c + 1) * dim]
                    .iter()
                    .zip(row)
                    .map(|(a, v)| a * v)
                    .sum::<f64>();
        }
        let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        loss += lse - z[yi];
        softmax_in_place(&mut z);
        z[yi] -= 1.0;
        for (c, &r) in z.iter().enumerate() {
            for (g, v) in grad[c * dim..(c + 1) * dim].iter_mut().zip(row) {
                *g += r * v;
            }
            grad[n_w + c] += r;
        }
    }
    let inv_n = 1.0 / n as f64;
    for g in grad.iter_mut() {
        *g *= inv_n;
    }
    let mut penalty = 0.0;
    for (g, &wv) in grad[..n_w].iter_mut().zip(w) {
        *g += lambda * wv;
        penalty += wv * wv;
    }
    (loss * inv_n + 0.5 * lambda * penalty, grad)
}

pub fn train(
    x: &EmbeddingMatrix,
    y: &[usize],
    n_classes: usize,
    config: &TrainConfig,
) -> Result<CalibratedModel> {
    train_traced(x, y, n_classes, config).map(|(m, _)| m)
}

/// Like [`train`], also returning the objective after every accepted step
/// (the first entry is the starting objective).
pub fn train_traced(
    x: &EmbeddingMatrix,
    y: &[usize],
    n_classes: usize,
    config: &TrainConfig,
) -> Result<(CalibratedModel, Vec<f64>)> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some(&bad) = y.iter().find(|&&c| c >= n_classes) {
        return Err(Error::InvalidArgument(format!(
            "label {bad} out of range for {n_classes} classes"
        )));
    }
    let mut counts = vec![0usize; n_classes];
    for &c in y {
        counts[c] += 1;
    }
    if counts.iter().filter(|&&k| k > 0).count() < 2 {
        return Err(Error::SingleClass);
    }
    if !(config.lambda >= 0.0) || !(config.tol > 0.0) {
        return Err(Error::InvalidArgument(
            "lambda must be >= 0 and tol > 0".into(),
        ));
    }

    let dim = x.dim();
    let n = x.len();

    // Canonical row order makes the fit independent of input order, down
    // to the last bit of every floating-point sum.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        y[a].cmp(&y[b]).then_with(|| {
            x.row(a)
                .iter()
                .zip(x.row(b))
                .map(|(p, q)| p.total_cmp(q))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
        })
    });
    let labels: Vec<usize> = order.iter().map(|&i| y[i]).collect();

    let scaler = fit_scaler(x, &order);
    let mut xs = vec![0.0; n * dim];
    for (r, &i) in order.iter().enumerate() {
        scaler.apply(x.row(i), &mut xs[r * dim..(r + 1) * dim]);
    }

    let n_w = n_classes * dim;
    let mut params = vec![0.0; n_w + n_classes];
    // Start from the prior: the exact optimum when the weights are zero.
    for (c, &k) in counts.iter().enumerate() {
        let share = if k > 0 { k as f64 } else { 0.5 };
        params[n_w + c] = (share / n as f64).ln();
    }

    let (mut f, mut g) =
        objective_and_gradient(&params, &xs, &labels, n_classes, dim, config.lambda);
    let mut trace = vec![f];
    let mut step: f64 = 1.0;
    let mut iterations = 0;
    let mut converged = inf_norm(&g) < config.tol;
    let mut candidate = vec![0.0; params.len()];

    while !converged && iterations < config.max_iter {
        iterations += 1;
        let g_sq: f64 = g.iter().map(|v| v * v).sum();
        let mut t = (step * 2.0).min(MAX_STEP);
        let accepted = loop {
            for ((c, &p), &gv) in candidate.iter_mut().zip(&params).zip(&g) {
                *c = p - t * gv;
            }
            let (f_new, g_new) =
                objective_and_gradient(&candidate, &xs, &labels, n_classes, dim, config.lambda);
            if f_new <= f - ARMIJO_C * t * g_sq {
                break Some((f_new, g_new));
            }
            t *= SHRINK;
            if t < MIN_STEP {
                break None;
            }
        };
        let Some((f_new, g_new)) = accepted else {
            log::debug!("line search stalled after {iterations} iterations");
            break;
        };
        std::mem::swap(&mut params, &mut candidate);
        f = f_new;
        g = g_new;
        step = t;
        trace.push(f);
        converged = inf_norm(&g) < config.tol;
    }
    if !converged {
        log::warn!(
            "logistic regression stopped after {iterations} iterations with gradient norm {:.3e}",
            inf_norm(&g)
        );
    }

    let bias = params.split_off(n_w);
    let model = CalibratedModel {
        n_classes,
        dim,
        weights: params,
        bias,
        scaler,
        meta: TrainingMeta {
            iterations,
            objective: f,
            lambda: config.lambda,
            converged,
        },
    };
    Ok((model, trace))
}

fn fit_scaler(x: &EmbeddingMatrix, order: &[usize]) -> FeatureScaler {
    let dim = x.dim();
    let n = order.len() as f64;
    let mut mean = vec![0.0; dim];
    for &i in order {
        for (m, &v) in mean.iter_mut().zip(x.row(i)) {
            *m += f64::from(v);
        }
    }
    for m in mean.iter_mut() {
        *m /= n;
    }
    let mut var = vec![0.0; dim];
    for &i in order {
        for ((s, &v), m) in var.iter_mut().zip(x.row(i)).zip(&mean) {
            let d = f64::from(v) - m;
            *s += d * d;
        }
    }
    let std = var
        .into_iter()
        .map(|s| (s / n).sqrt().max(STD_FLOOR))
        .collect();
    FeatureScaler { mean, std }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn matrix(rows: Vec<Vec<f32>>) -> EmbeddingMatrix {
        let ids = (0..rows.len()).map(|i| format!("r{i}")).collect();
        EmbeddingMatrix::from_rows(ids, rows, "test").unwrap()
    }

    /// A direction w with sign(w·x) matching the labels, found by scanning
    /// angles on a fine grid; independent of the optimizer.
    fn separating_direction(rows: &[Vec<f32>], y: &[usize]) -> Option<(f64, f64)> {
        (0..3600).find_map(|k| {
            let a = f64::from(k) * std::f64::consts::PI / 1800.0;
            let (c, s) = (a.cos(), a.sin());
            let ok = rows.iter().zip(y).all(|(r, &l)| {
                let m = c * f64::from(r[0]) + s * f64::from(r[1]);
                (m > 0.0) == (l == 1) && m != 0.0
            });
            ok.then_some((c, s))
        })
    }

    #[test]
    fn separable_toy_set_is_fit_exactly() {
        let rows = vec![
            vec![1.0, 2.0],
            vec![2.0, 1.5],
            vec![-1.0, -0.5],
            vec![-2.0, -1.0],
        ];
        let y = vec![1, 1, 0, 0];
        assert!(separating_direction(&rows, &y).is_some());
        let m = train(
            &matrix(rows.clone()),
            &y,
            2,
            &TrainConfig {
                lambda: 1e-2,
                ..TrainConfig::default()
            },
        )
        .unwrap();
        for (r, &l) in rows.iter().zip(&y) {
            assert_eq!(m.predict_row(r).unwrap().argmax, l);
        }
    }

    #[test]
    fn no_signal_predicts_priors() {
        let rows = vec![vec![0.3, -1.0]; 10];
        let y = vec![0, 0, 0, 1, 1, 1, 1, 1, 1, 1];
        let m = train(&matrix(rows), &y, 2, &TrainConfig::default()).unwrap();
        for probe in [[0.3f32, -1.0], [5.0, 5.0], [-3.0, 0.0]] {
            let p = m.predict_row(&probe).unwrap();
            assert!((p.probs[0] - 0.3).abs() < 1e-3, "{:?}", p.probs);
            assert!((p.probs[1] - 0.7).abs() < 1e-3);
        }
    }

    #[test]
    fn huge_penalty_pins_weights_to_zero() {
        let rows: Vec<Vec<f32>> = (0..12).map(|i| vec![i as f32, (i % 3) as f32]).collect();
        let y: Vec<usize> = (0..12).map(|i| usize::from(i >= 4)).collect();
        let m = train(
            &matrix(rows.clone()),
            &y,
            2,
            &TrainConfig {
                lambda: 1e6,
                ..TrainConfig::default()
            },
        )
        .unwrap();
        assert!(inf_norm(m.weights()) < 1e-3);
        for r in &rows {
            let p = m.predict_row(r).unwrap();
            assert!((p.probs[1] - 8.0 / 12.0).abs() < 1e-3);
        }
    }

    #[test]
    fn single_class_rejected() {
        let rows = vec![vec![1.0], vec![2.0]];
        assert!(matches!(
            train(&matrix(rows), &[1, 1], 2, &TrainConfig::default()),
            Err(Error::SingleClass)
        ));
    }

    #[test]
    fn iteration_cap_sets_warning_flag() {
        let rows: Vec<Vec<f32>> = (0..20)
            .map(|i| vec![i as f32, (i * 7 % 5) as f32])
            .collect();
        let y: Vec<usize> = (0..20).map(|i| (i * 3 % 2) as usize).collect();
        let m = train(
            &matrix(rows),
            &y,
            2,
            &TrainConfig {
                lambda: 1e-4,
                tol: 1e-14,
                max_iter: 3,
            },
        )
        .unwrap();
        assert!(!m.meta().converged);
        assert_eq!(m.meta().iterations, 3);
    }

    #[test]
    fn constant_dimension_uses_std_floor() {
        let rows = vec![
            vec![1.0, 5.0],
            vec![2.0, 5.0],
            vec![3.0, 5.0],
            vec![4.0, 5.0],
        ];
        let m = train(&matrix(rows), &[0, 0, 1, 1], 2, &TrainConfig::default()).unwrap();
        assert_eq!(m.scaler().std[1], STD_FLOOR);
        assert!(m.weights().iter().all(|w| w.is_finite()));
    }

    fn lcg(state: &mut u64) -> f64 {
        *state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((*state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    }

    proptest! {
        #[test]
        fn objective_decreases_monotonically(seed in any::<u64>(), n in 6usize..20, d in 1usize..5) {
            let mut s = seed;
            let rows: Vec<Vec<f32>> = (0..n).map(|_| (0..d).map(|_| lcg(&mut s) as f32 * 3.0).collect()).collect();
            let mut y: Vec<usize> = (0..n).map(|_| usize::from(lcg(&mut s) > 0.0)).collect();
            y[0] = 0;
            y[1] = 1;
            let (_, trace) = train_traced(&matrix(rows), &y, 2, &TrainConfig { max_iter: 200, ..TrainConfig::default() }).unwrap();
            for w in trace.windows(2) {
                prop_assert!(w[1] <= w[0]);
            }
        }
    }
}
