//! End-to-end runs over boundary base points and the command-line front end.

pub mod cli;
mod config;
mod run;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use config::{BasePoints, ChartConfig, ClamConfig, FieldSource, FieldSynth, PipelineConfig};
pub use run::{
    run_pipeline, BasePointReport, ChartSummary, FieldSummary, PipelineReport, Timings, Uniformity, UNIFORMITY_TOL,
};

/// Version tag of the report schema.
pub const REPORT_FORMAT: &str = "CSR-1";

type BoxError = Box<dyn std::error::Error + Send + Sync>;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("field file not found: {}", .0.display())]
    MissingFile(PathBuf),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{step}: {source}")]
    Global { step: &'static str, source: BoxError },
    #[error("base point {index} {base_point:?}, {step}: {source}")]
    Step { index: usize, base_point: [f64; 3], step: &'static str, source: BoxError },
}

impl PipelineError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        PipelineError::Io { path: path.to_path_buf(), source }
    }
}
