//! Scenario configs, run manifests and the command implementations behind
//! the `cloak` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;
pub mod output;

pub use commands::{run, RunOutcome};
pub use config::RunConfig;
pub use error::CliError;
pub use manifest::RunManifest;
