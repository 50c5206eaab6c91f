use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

/// A configuration problem, anchored to a line when one is to blame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    pub fn at(line: usize, message: impl Into<String>) -> Self {
        Self {
            line: Some(line),
            message: message.into(),
        }
    }

    pub fn whole(message: impl Into<String>) -> Self {
        Self {
            line: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Config {
        path: PathBuf,
        #[source]
        source: ConfigError,
    },

    #[error("cannot read {path}: {source}")]
    ReadConfig {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Gauge(#[source] ncphase_core::Error),

    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("simulation failed: {0}")]
    Simulation(#[source] ncphase_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::ReadConfig { .. } | CliError::Usage(_) => 2,
            CliError::Gauge(_) => 3,
            CliError::Output { .. } => 4,
            CliError::Simulation(_) => 1,
        }
    }
}

impl From<ncphase_core::Error> for CliError {
    fn from(e: ncphase_core::Error) -> Self {
        match e {
            ncphase_core::Error::NoRealGauge { .. } => CliError::Gauge(e),
            ncphase_core::Error::InvalidArgument(ref msg) => CliError::Usage(msg.clone()),
            other => CliError::Simulation(other),
        }
    }
}
