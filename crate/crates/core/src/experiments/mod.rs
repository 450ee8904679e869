//! Experiment harness behind the command-line tool: configuration, scenario
//! construction, sweeps and report files.

mod config;
mod output;
mod runs;
mod scenario;

pub use config::{Algorithm, DataSource, ExperimentConfig, InputFiles, OracleConfig, SampleConfig, SynthScenario};
pub use output::{read_assignment_csv, write_assignment_csv, write_rows_csv, write_telemetry_jsonl};
pub use runs::{
    cmd_evaluate, cmd_oracle_compare, cmd_partition, cmd_sweep_alpha, cmd_sweep_providers, cmd_synth,
    oracle_instance, oracle_rows, run_algorithm, sweep_alpha_rows, sweep_provider_rows, AlgorithmRun,
    OracleRow, PartitionReport, SweepRow,
};
pub use scenario::{load_files, synth_scenario, Scenario};

use std::path::Path;

use thiserror::Error;

use crate::cloud::ModelError;
use crate::graph::GraphError;
use crate::objective::ObjectiveError;
use crate::partition::PartitionError;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}: {message}")]
    Input { path: String, message: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
}

impl ExperimentError {
    pub fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        ExperimentError::Io { path: path.display().to_string(), message: e.to_string() }
    }

    pub fn input(path: &Path, e: impl std::fmt::Display) -> Self {
        ExperimentError::Input { path: path.display().to_string(), message: e.to_string() }
    }

    /// Stable machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            ExperimentError::Config(_) => "config",
            ExperimentError::Io { .. } => "io",
            ExperimentError::Input { .. } => "input",
            ExperimentError::Graph(_) => "graph",
            ExperimentError::Model(_) => "model",
            ExperimentError::Partition(_) => "partition",
            ExperimentError::Objective(_) => "objective",
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self.kind(), "message": self.to_string() }).to_string()
    }
}
