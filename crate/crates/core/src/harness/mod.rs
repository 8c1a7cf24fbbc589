//! Configured experiment runs and their on-disk reports.

pub mod experiment;
pub mod histogram;
pub mod report;

pub use experiment::{
    preset, run_experiment, Erratum, ExperimentConfig, ExperimentKind, RunOutput, RunResult,
    PRESET_IDS,
};
pub use histogram::{build_histogram, uniformity_metrics, Histogram, Uniformity};
pub use report::{emit_report, FileEntry};
