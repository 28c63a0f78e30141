//! Per-phase timing and its conversion into dollars and CO₂.
//!
//! Time is aggregated over all folds before conversion. The carbon model is
//! energy × intensity: `hours · gpu_kW · PUE · kgCO₂/kWh`. The default GPU
//! power (a 250 W Tesla P100) and grid intensity (0.112 kg/kWh) are
//! estimates, not measured values; reports label them as such.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::llm::{makespan, BatchOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Representation,
    ClassifierTraining,
    ThresholdTuning,
    LlmPrompting,
    Prediction,
}

impl Phase {
    pub const ALL: [Phase; 5] = [
        Phase::Representation,
        Phase::ClassifierTraining,
        Phase::ThresholdTuning,
        Phase::LlmPrompting,
        Phase::Prediction,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Representation => "representation",
            Phase::ClassifierTraining => "classifier_training",
            Phase::ThresholdTuning => "threshold_tuning",
            Phase::LlmPrompting => "llm_prompting",
            Phase::Prediction => "prediction",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseTiming {
    pub phase: Phase,
    pub seconds: f64,
    pub fold: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeTotals {
    pub per_fold: BTreeMap<usize, f64>,
    pub total: f64,
}

/// Append-only record of phase timings; one entry per (phase, fold).
#[derive(Debug, Default)]
pub struct CostLedger {
    records: Mutex<Vec<PhaseTiming>>,
}

impl CostLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&self, phase: Phase, fold: usize, seconds: f64) -> Result<()> {
        if !(seconds >= 0.0) || !seconds.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "duration for {phase} must be a non-negative number of seconds, got {seconds}"
            )));
        }
        let mut records = self.records.lock().expect("ledger lock");
        if records.iter().any(|r| r.phase == phase && r.fold == fold) {
            return Err(Error::InvalidArgument(format!(
                "{phase} already recorded for fold {fold}"
            )));
        }
        records.push(PhaseTiming {
            phase,
            seconds,
            fold,
        });
        Ok(())
    }

    /// Records sorted by (fold, phase).
    pub fn records(&self) -> Vec<PhaseTiming> {
        let mut out = self.records.lock().expect("ledger lock").clone();
        out.sort_by_key(|r| (r.fold, r.phase));
        out
    }

    pub fn totals(&self) -> TimeTotals {
        total_time(&self.records())
    }
}

pub fn total_time(timings: &[PhaseTiming]) -> TimeTotals {
    let mut per_fold = BTreeMap::new();
    for t in timings {
        *per_fold.entry(t.fold).or_insert(0.0) += t.seconds;
    }
    let total = per_fold.values().sum();
    TimeTotals { per_fold, total }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CostModel {
    pub gpu_power_kw: f64,
    /// kg CO₂ per kWh.
    pub carbon_intensity: f64,
    pub pue: f64,
    pub dollars_per_hour: f64,
    pub folds: usize,
}

impl Default for CostModel {
    fn default() -> Self {
        Self {
            gpu_power_kw: 0.250,
            carbon_intensity: 0.112,
            pue: 1.0,
            dollars_per_hour: 0.752,
            folds: 5,
        }
    }
}

impl CostModel {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("gpu_power_kw", self.gpu_power_kw),
            ("carbon_intensity", self.carbon_intensity),
            ("pue", self.pue),
            ("dollars_per_hour", self.dollars_per_hour),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!(
                    "cost model {name} must be positive, got {v}"
                )));
            }
        }
        if self.folds == 0 {
            return Err(Error::Config("cost model folds must be positive".into()));
        }
        Ok(())
    }

    /// Total across folds from an average per-fold time.
    pub fn all_folds(&self, seconds_per_fold: f64) -> f64 {
        seconds_per_fold * self.folds as f64
    }
}

pub fn dollars(total_seconds: f64, model: &CostModel) -> f64 {
    total_seconds / 3600.0 * model.dollars_per_hour
}

pub fn co2_kg(total_seconds: f64, model: &CostModel) -> f64 {
    total_seconds / 3600.0 * model.gpu_power_kw * model.pue * model.carbon_intensity
}

/// Dollar amount formatted to cents.
pub fn format_cents(amount: f64) -> String {
    format!("{amount:.2}")
}

/// Deterministic per-unit charges used by [`Clock::Virtual`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VirtualRates {
    pub representation_s_per_doc: f64,
    pub training_s_per_doc: f64,
    pub prediction_s_per_doc: f64,
}

impl Default for VirtualRates {
    fn default() -> Self {
        Self {
            representation_s_per_doc: 0.01,
            training_s_per_doc: 0.001,
            prediction_s_per_doc: 0.0005,
        }
    }
}

/// Source of phase durations.
///
/// `Monotonic` measures elapsed wall time. `Virtual` charges fixed rates
/// per document for local phases and the simulated schedule of reported
/// backend latencies for LLM batches, so that reruns produce identical
/// cost figures.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Clock {
    #[default]
    Monotonic,
    Virtual(VirtualRates),
}

impl Clock {
    fn rate(rates: &VirtualRates, phase: Phase) -> f64 {
        match phase {
            Phase::Representation => rates.representation_s_per_doc,
            Phase::ClassifierTraining => rates.training_s_per_doc,
            Phase::Prediction | Phase::ThresholdTuning => rates.prediction_s_per_doc,
            Phase::LlmPrompting => 0.0,
        }
    }

    /// Run `f`, returning its output and the seconds charged for `units`
    /// documents of `phase` work.
    pub fn time<T>(&self, phase: Phase, units: usize, f: impl FnOnce() -> T) -> (T, f64) {
        let started = Instant::now();
        let out = f();
        let seconds = match self {
            Clock::Monotonic => started.elapsed().as_secs_f64(),
            Clock::Virtual(rates) => units as f64 * Self::rate(rates, phase),
        };
        (out, seconds)
    }

    /// Seconds charged for an LLM batch dispatched over `workers` slots.
    pub fn batch_seconds(&self, batch: &BatchOutcome, workers: usize) -> f64 {
        match self {
            Clock::Monotonic => batch.wall_seconds,
            Clock::Virtual(_) => {
                let latencies: Vec<f64> = batch.verdicts.iter().map(|v| v.latency_s).collect();
                makespan(&latencies, workers)
            }
        }
    }

    pub fn is_virtual(&self) -> bool {
        matches!(self, Clock::Virtual(_))
    }
}
