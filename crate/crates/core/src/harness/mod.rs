//! Experiment harness: configuration files, one driver per experiment kind
//! and the result files every run writes.

mod config;
mod experiments;
mod output;
mod sampling;

pub use config::{
    ConfigError, DataSection, DispersionSection, ExpectedStatus, ExperimentConfig, ExperimentKind,
    GridSection, ParamsSection, PicardSection, SnapshotKind, SolverSection, SweepSection,
    ThresholdSection,
};
pub use experiments::{
    collect_reports, run_experiment, HarnessError, RunReport, RESULTS_FILE, TIMING_FILE,
};
pub use output::{
    cell, read_summary, Check, CsvSink, Manifest, PlotData, RunDir, Summary, CONFIG_FILE,
    MANIFEST_FILE, SUMMARY_FILE,
};
pub use sampling::{conservation_drift, embed, lyapunov_sweep, resolved_field, RatioRange};
