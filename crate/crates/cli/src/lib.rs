//! Experiment harness: parses experiment files, sweeps scenario grids over
//! a worker pool and writes plot-ready CSV tables.

pub mod error;
pub mod experiment;
pub mod oracle;
pub mod spec;
pub mod validate;

pub use error::CliError;
pub use experiment::{best_psm, frame_csv, frame_table, render_experiment, run_experiment, BestPsm, CSV_VERSION};
pub use oracle::OracleTable;
pub use spec::{AtimChoice, ExperimentKind, ExperimentSpec, FrameChoice};
pub use validate::{loss_band, tolerance, validate_analysis, validate_points, ValidationOptions, ValidationReport};
