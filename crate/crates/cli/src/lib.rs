//! Experiment harness: figure recipes, scenario files, CSV output and the
//! acceptance report.

pub mod codec_check;
pub mod criteria;
pub mod recipes;
pub mod scenario;
pub mod table;

use std::path::Path;

use coopcast::error::{NumError, SimError};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("bad results data: {0}")]
    Data(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io { path: path.display().to_string(), source }
    }
}

impl From<NumError> for CliError {
    fn from(e: NumError) -> Self {
        Self::Config(e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        Self::Config(e.to_string())
    }
}

pub mod exit {
    pub const OK: i32 = 0;
    pub const ACCEPTANCE_FAILED: i32 = 1;
    pub const CONFIG: i32 = 2;
}
