//! Experiment orchestration: the run manifest, the train / evaluate / sweep
//! / route / export-cassette commands and report rendering.

mod manifest;
pub mod report;
mod run;

pub use manifest::{ClockConfig, ClockMode, DatasetConfig, Method, RouterSection, RunManifest};
pub use run::{
    cmd_evaluate, cmd_export_cassette, cmd_report, cmd_route, cmd_sweep, cmd_train, load_inputs,
    model_path, read_results, write_results, AuditSummary, CassetteSource, CostRow,
    EvaluationResults, Inputs, RouteSummary, SweepRow, TTestRow, ThresholdSummary, TrainedFold,
};
