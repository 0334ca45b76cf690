//! Experiment runner: figure configurations, method execution, metrics and
//! CSV/JSON reports.

mod config;
mod metrics;
mod output;
mod run;

pub use config::{
    builtin_experiment, builtin_experiments, ExperimentConfig, Method, DEFAULT_H, DEFAULT_MAX_STEPS,
};
pub use metrics::{
    detect_singularity, max_conic_distance, median, mesh_drift, order2_drift, order3_drift,
    tangent_crossings, winding_angle, Singularity, SingularityKind, BLOWUP_SLOPE,
};
pub use output::{read_trajectory_csv, write_trajectory_csv, CsvRow};
pub use run::{
    benchmark_step_cost, execute_method, run_experiment, run_experiment_with, CostComparison,
    MethodOutcome, MethodReport, RunOptions, RunReport, NUDGE, OUT_ENV,
};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
