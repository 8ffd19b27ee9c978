//! Repeated-split experiments, dimension sweeps and NMF initialization studies.

mod config;
mod report;
mod run;

pub use config::{DimsConfig, ExperimentConfig, FactorizationConfig, MethodName};
pub use report::{
    emit_init_study, emit_report, emit_sweep, format_cell, format_exact, DatasetSummary,
    DimStability, ExperimentReport, InitStudy, InitStudyRow, MethodResult, PairwiseTest, SweepRow,
    SweepTable,
};
pub use run::{
    dimension_sweep, evaluate_method, mean_std, nmf_init_study, run_experiment, run_experiment_on,
};
