//! Front end for sscc experiments: configuration files, the `run`,
//! `trace-gen`, `train` and `report` commands, and their file formats.

pub mod cmd;
pub mod config;
pub mod metrics;

use std::path::Path;

use thiserror::Error;

use sscc_core::predictor::PredictError;
use sscc_core::sim::SimError;

pub use config::{parse_config, ConfigError, MatrixSource, RunConfig, SpeedSource};
pub use metrics::{SchemaError, Summary};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Predict(#[from] PredictError),
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 2 when too few results arrived to decode, 1 for anything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Sim(e) if e.is_undecodable() => 2,
            _ => 1,
        }
    }
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub(crate) fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}
