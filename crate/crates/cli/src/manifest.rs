use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::{RunConfig, SCHEMA_VERSION};
use crate::error::CliError;

/// Fixed seed recorded for oracles that sample; the CLI itself draws no
/// random numbers.
pub const DEFAULT_SEED: u64 = 0x5eed;

/// Everything needed to reproduce a run's output files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: u32,
    pub tool_version: String,
    pub scenario_id: String,
    pub seed: u64,
    /// Truncation order actually used, when the command solves modes.
    pub n_max: Option<usize>,
    #[serde(flatten)]
    pub run: RunConfig,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(run: RunConfig, n_max: Option<usize>, outputs: Vec<String>) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            scenario_id: run.scenario_id().to_string(),
            seed: DEFAULT_SEED,
            n_max,
            run,
            outputs,
        }
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        std::fs::write(dir.join("manifest.json"), self.to_json()?)?;
        Ok(())
    }
}
