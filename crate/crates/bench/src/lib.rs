//! Benchmark harness: datasets, trials, tuning, statistics and reports.

pub mod config;
pub mod dataset;
pub mod fixtures;
pub mod pipeline;
pub mod planner;
pub mod report;
pub mod stats;
pub mod tuning;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("unknown planner id {0:?}")]
    UnknownPlanner(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error(transparent)]
    Core(#[from] pdg_core::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
