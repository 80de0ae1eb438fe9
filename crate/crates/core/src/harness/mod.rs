//! Experiment matrices: configuration, seeded execution with on-disk
//! resume, and the success-rate and cactus reports.
//!
//! Layout of an output directory:
//!
//! ```text
//! manifest.json                    benchmark and optimizer order
//! runs/<label>__<opt>__<rep>.json  one record per repetition
//! runs/<label>__<opt>__<rep>.wall  wall-clock seconds, kept apart so records stay reproducible
//! table.csv, table.txt, cactus.csv reports
//! ```

mod config;
mod report;
mod runner;
mod seed;

use std::path::PathBuf;

use thiserror::Error;

pub use config::{BenchmarkConfig, ExperimentConfig, OptimizerConfig, OptimizerKind, PriorConfig, SutConfig};
pub use report::{
    cactus_series, emit_cactus, emit_table, format_cell, load_results, write_reports, CellResult, RepetitionSummary,
    Table,
};
pub use runner::{record_key, run_matrix, run_matrix_with, Manifest, MatrixSummary, RunRecord};
pub use seed::derive_seed;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("{0}")]
    Invalid(String),
    #[error("benchmark `{label}`: bad requirement: {message}")]
    Spec { label: String, message: String },
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: unreadable record: {message}")]
    Record { path: PathBuf, message: String },
    #[error("worker pool: {0}")]
    Pool(String),
}

impl HarnessError {
    fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| Self::Io { path, source }
    }
}
