//! JSON run configuration.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::init::GENERATORS;
use crate::state::SimParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitSpec {
    pub name: String,
    #[serde(default)]
    pub params: serde_json::Value,
}

fn one() -> u64 {
    1
}

/// Everything needed for one run: the simulation parameters (flattened at the
/// top level), the initial data and the output layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub params: SimParams,
    pub init: InitSpec,
    pub output_dir: PathBuf,
    #[serde(default = "one")]
    pub sample_every: u64,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    #[serde(default)]
    pub emit_plots_data: bool,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file. A relative `output_dir` is kept as written, i.e.
    /// relative to the working directory.
    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !GENERATORS.contains(&self.init.name.as_str()) {
            return Err(Error::UnknownGenerator(self.init.name.clone()));
        }
        if self.sample_every == 0 {
            return Err(Error::param("sample_every must be at least 1"));
        }
        if let Some(t) = self
            .snapshot_times
            .iter()
            .find(|&&t| !(t >= 0.0 && t <= self.params.t_end))
        {
            return Err(Error::param(format!("snapshot time {t} outside [0, t_end]")));
        }
        Ok(())
    }
}
