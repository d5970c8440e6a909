use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("invalid value {value:?} for key `{key}`")]
    BadValue { key: String, value: String },
    #[error("parameter invariant violated: {0}")]
    Invariant(String),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EnergyError {
    #[error("negative duration {0} us")]
    NegativeDuration(i64),
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: {source}")]
    Param {
        line: usize,
        #[source]
        source: ParamError,
    },
    #[error("invalid scenario: {0}")]
    Invalid(String),
}
