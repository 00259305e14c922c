//! Experiment harness around `ued-core`: configuration files, run artifacts
//! and their integrity checks, evaluation suites, plotting, and the `ued`
//! command line.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiment;
pub mod inspect;
pub mod manifest;
pub mod metrics;
pub mod plot;
pub mod snapshot;
pub mod suite;

pub use error::{LabError, Result};
