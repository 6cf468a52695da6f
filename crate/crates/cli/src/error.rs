use std::io;
use std::path::{Path, PathBuf};

use hybrid_sched::config::ConfigError;
use hybrid_sched::{ExactError, MetricsError, ModelError, ScheduleError, TraceError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Infeasible(String),
    #[error("{}: {source}", .path.display())]
    Io { path: PathBuf, source: io::Error },
    /// A produced schedule failed its own verification.
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Io { .. } => 4,
            CliError::Internal(_) => 1,
        }
    }

    pub fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(err: ModelError) -> Self {
        CliError::Validation(err.to_string())
    }
}

impl From<MetricsError> for CliError {
    fn from(err: MetricsError) -> Self {
        CliError::Validation(err.to_string())
    }
}

impl From<ScheduleError> for CliError {
    fn from(err: ScheduleError) -> Self {
        match err {
            ScheduleError::Model(err) => err.into(),
            ScheduleError::Metrics(err) => err.into(),
            other => CliError::Infeasible(other.to_string()),
        }
    }
}

impl From<ExactError> for CliError {
    fn from(err: ExactError) -> Self {
        match err {
            ExactError::Infeasible { .. } => CliError::Infeasible(err.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<TraceError> for CliError {
    fn from(err: TraceError) -> Self {
        match err {
            TraceError::Io(source) => CliError::Io {
                path: PathBuf::from("<trace>"),
                source,
            },
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(err: ConfigError) -> Self {
        match err {
            ConfigError::Io(source) => CliError::Io {
                path: PathBuf::from("<config>"),
                source,
            },
            other => CliError::Validation(other.to_string()),
        }
    }
}
