//! Frame-by-frame match analysis and its configuration.

mod config;
mod run;

use std::path::PathBuf;

use thiserror::Error;

pub use config::{ConfigError, GeometryConfig, PipelineConfig};
pub use run::{classify_clip_stream, resident_kib, run_pipeline, FrameOutput, Pipeline, RunReport, TrackOut};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("missing file: {}", .0.display())]
    MissingFile(PathBuf),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl PipelineError {
    /// Process exit status for this failure class.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::MissingFile(_) => 2,
            PipelineError::Malformed(_) => 3,
            PipelineError::Config(_) => 4,
            PipelineError::Io(_) => 5,
        }
    }
}

impl From<ConfigError> for PipelineError {
    fn from(e: ConfigError) -> Self {
        PipelineError::Config(e.to_string())
    }
}
