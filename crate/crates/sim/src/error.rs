use beaconmac_analytic::AnalyticError;
use beaconmac_core::ConfigError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    Config(#[from] ConfigError),
    #[error("realtime frame: {0}")]
    Frame(#[from] AnalyticError),
    #[error("invalid scenario: {0}")]
    Invalid(String),
}
