//! Experiment harness around [`ergolab_core`]: run specifications with
//! per-family defaults, a content-addressed cell store that makes runs
//! resumable and interruption-safe, and canonical CSV + metadata output
//! whose bytes are independent of scheduling and caching history.

pub mod acceptance;
pub mod config;
pub mod csvout;
pub mod ensemble;
pub mod experiments;
pub mod hash;
pub mod stats;
pub mod store;

pub use config::{ConfigFile, ExperimentId, HarnessError, RunSpec};
pub use experiments::{run, RunRequest, RunSummary};
