//! Experiment harness for the limited-feedback beamforming library:
//! configuration, experiment orchestration, and result persistence.

pub mod config;
pub mod error;
pub mod experiments;
pub mod report;

pub use config::ExperimentConfig;
pub use error::{Error, Result};
