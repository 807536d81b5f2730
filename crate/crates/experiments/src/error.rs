use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config key `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("unknown preset `{0}` (available: paper-2007)")]
    UnknownPreset(String),

    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),

    #[error(transparent)]
    Simulation(#[from] darkgate::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("serialization failed: {0}")]
    Serialize(String),
}

impl ExperimentError {
    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        ExperimentError::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }

    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            ExperimentError::Config { .. } | ExperimentError::UnknownPreset(_) | ExperimentError::Parse(_) => "config",
            ExperimentError::Simulation(darkgate::Error::Config { .. }) => "config",
            ExperimentError::Simulation(darkgate::Error::Numerical { .. }) => "numerical",
            ExperimentError::Simulation(_) => "domain",
            ExperimentError::Io { .. } => "io",
            ExperimentError::Serialize(_) => "serialize",
        }
    }
}

impl From<serde_json::Error> for ExperimentError {
    fn from(e: serde_json::Error) -> Self {
        ExperimentError::Serialize(e.to_string())
    }
}

impl From<csv::Error> for ExperimentError {
    fn from(e: csv::Error) -> Self {
        ExperimentError::Serialize(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, ExperimentError>;
