//! Dataset registry, checkpointed suite runs and the tests-by-datasets
//! result matrix.
//!
//! A plan lists datasets and one suite configuration. Each dataset's tests
//! are checkpointed individually under `<dir>/<dataset_id>/<test>.result`,
//! so an interrupted run picks up where it stopped and produces the same
//! matrix as an uninterrupted one.

mod dataset;
mod matrix;
mod runner;

use thiserror::Error;

pub use dataset::{
    canonical_experiments, canonical_noise, DatasetRecord, DatasetSource, ExperimentPlan, CANONICAL_BIAS,
    CANONICAL_BIT_COUNTS, CANONICAL_SETTINGS,
};
pub use matrix::{aggregate, Cell, DatasetColumn, DatasetSummary, ExperimentMatrix, MatrixColumn};
pub use runner::{checkpoint_path, run_dataset, run_dataset_limited, run_plan, Checkpoint, Progress};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("unreadable source: {0}")]
    Source(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("config mismatch: {0}")]
    ConfigMismatch(String),
    #[error("malformed matrix: {0}")]
    Parse(String),
    #[error(transparent)]
    Suite(#[from] crate::nist::ConfigError),
    #[error(transparent)]
    Sim(#[from] crate::annealer::SimError),
    #[error(transparent)]
    Bitstream(#[from] crate::bitstream::BitstreamError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
