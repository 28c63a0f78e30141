use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

// Two-sided Student t critical values for df = 1..=30.
const T_90: [f64; 30] = [
    6.314, 2.920, 2.353, 2.132, 2.015, 1.943, 1.895, 1.860, 1.833, 1.812, 1.796, 1.782, 1.771,
    1.761, 1.753, 1.746, 1.740, 1.734, 1.729, 1.725, 1.721, 1.717, 1.714, 1.711, 1.708, 1.706,
    1.703, 1.701, 1.699, 1.697,
];
const T_95: [f64; 30] = [
    12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228, 2.201, 2.179, 2.160,
    2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064, 2.060, 2.056,
    2.052, 2.048, 2.045, 2.042,
];
const T_99: [f64; 30] = [
    63.657, 9.925, 5.841, 4.604, 4.032, 3.707, 3.499, 3.355, 3.250, 3.169, 3.106, 3.055, 3.012,
    2.977, 2.947, 2.921, 2.898, 2.878, 2.861, 2.845, 2.831, 2.819, 2.807, 2.797, 2.787, 2.779,
    2.771, 2.763, 2.756, 2.750,
];

/// Two-sided critical value at significance `alpha` (0.10, 0.05 or 0.01).
/// Beyond 30 degrees of freedom the normal quantile is used.
pub fn t_critical(df: usize, alpha: f64) -> Result<f64> {
    let (table, z) = if (alpha - 0.05).abs() < 1e-12 {
        (&T_95, 1.960)
    } else if (alpha - 0.10).abs() < 1e-12 {
        (&T_90, 1.645)
    } else if (alpha - 0.01).abs() < 1e-12 {
        (&T_99, 2.576)
    } else {
        return Err(Error::InvalidArgument(format!(
            "unsupported significance level {alpha}; use 0.10, 0.05 or 0.01"
        )));
    };
    match df {
        0 => Err(Error::InvalidArgument(
            "degrees of freedom must be positive".into(),
        )),
        1..=30 => Ok(table[df - 1]),
        _ => Ok(z),
    }
}

/// Mean of per-fold scores with a 95% confidence half-width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldScores {
    pub method: String,
    pub folds: Vec<f64>,
    pub mean: f64,
    /// `t(0.975, k-1) · s / √k` with `s` the sample standard deviation.
    pub half_width: f64,
}

pub fn fold_summary(method: impl Into<String>, scores: &[f64]) -> Result<FoldScores> {
    let k = scores.len();
    if k < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 folds, got {k}"
        )));
    }
    let mean = mean(scores);
    let s = sample_std(scores, mean);
    let half_width = t_critical(k - 1, 0.05)? * s / (k as f64).sqrt();
    Ok(FoldScores {
        method: method.into(),
        folds: scores.to_vec(),
        mean,
        half_width,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    ABetter,
    Tie,
    BBetter,
}

impl Verdict {
    pub fn mirrored(self) -> Self {
        match self {
            Verdict::ABetter => Verdict::BBetter,
            Verdict::Tie => Verdict::Tie,
            Verdict::BBetter => Verdict::ABetter,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub verdict: Verdict,
    /// Infinite when every difference is the same non-zero value.
    pub t: f64,
    pub critical: f64,
}

/// Paired two-sided t-test on `a − b`.
///
/// All-zero differences give a tie with `t = 0`; a constant non-zero
/// difference has zero variance and is decided by the sign of its mean.
pub fn paired_t_test(a: &[f64], b: &[f64], alpha: f64) -> Result<TTest> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let k = a.len();
    if k < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 paired values, got {k}"
        )));
    }
    let critical = t_critical(k - 1, alpha)?;
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let d_mean = mean(&d);
    if d.iter().all(|&v| v == 0.0) {
        return Ok(TTest {
            verdict: Verdict::Tie,
            t: 0.0,
            critical,
        });
    }
    let s = sample_std(&d, d_mean);
    let t = if s == 0.0 {
        f64::INFINITY.copysign(d_mean)
    } else {
        d_mean / (s / (k as f64).sqrt())
    };
    let verdict = if t.abs() <= critical {
        Verdict::Tie
    } else if t > 0.0 {
        Verdict::ABetter
    } else {
        Verdict::BBetter
    };
    Ok(TTest {
        verdict,
        t,
        critical,
    })
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn sample_std(v: &[f64], mean: f64) -> f64 {
    let ss: f64 = v.iter().map(|x| (x - mean) * (x - mean)).sum();
    (ss / (v.len() - 1) as f64).sqrt()
}
