//! Configuration, orchestration, persistence and reporting for the RB,
//! walk and GST pipelines of `qcvv-core`.
//!
//! A run is described by an [`ExperimentConfig`], executed by [`run`] as a
//! list of named tasks, and recorded in a [`RunManifest`] that is written
//! before the first task and updated after each one, so an interrupted run
//! resumes from its last completed task.

pub mod config;
pub mod error;
pub mod json;
pub mod manifest;
pub mod report;
pub mod run;

pub use config::{Acceptance, ExperimentConfig, GstBlock, LongWalkBlock, Protocol, RbBlock, WalkScanBlock};
pub use error::{CliError, CliResult};
pub use manifest::{OutputFile, RunManifest, RunStatus, MANIFEST_FILE};
pub use report::report;
pub use run::run;
