use std::path::PathBuf;

use beaconmac_analytic::AnalyticError;
use beaconmac_core::ConfigError;
use beaconmac_sim::SimError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("experiment spec line {line}: {msg}")]
    Spec { line: usize, msg: String },
    #[error("empty grid: `{0}` needs at least one value")]
    EmptyGrid(&'static str),
    #[error("invalid experiment: {0}")]
    Invalid(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
}

impl CliError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}
