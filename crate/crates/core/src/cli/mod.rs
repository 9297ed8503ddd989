//! Batch experiment driver: configs, the per-bin pipeline, artifacts and the
//! four command verbs used by the `soundfield` binary.

pub mod commands;
pub mod config;
pub mod manifest;
pub mod pipeline;

pub use commands::{cmd_inspect, cmd_run, cmd_simulate, cmd_sweep, RunOutput, RunReport, SweepRow};
pub use config::{ExperimentConfig, Method, TransferSpec};
pub use manifest::RunManifest;
pub use pipeline::{Experiment, Job, JobOutcome};
