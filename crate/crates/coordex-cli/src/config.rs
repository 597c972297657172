//! Experiment configuration: one JSON document naming the scenario,
//! optionally a concrete auxiliary scheme, and the optimizer and/or
//! simulator sections to run.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use coordex::optimizer::OptimizerConfig;
use coordex::scenario::{AuxScheme, ScenarioSpec};
use coordex::sim::SimConfig;

use crate::CliError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub spec: ScenarioSpec,
    /// Concrete scheme to evaluate or simulate; commands fall back to
    /// an optimizer run when it is absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aux: Option<AuxScheme>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimizer: Option<OptimizerConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimConfig>,
    pub output_path: PathBuf,
    #[serde(default)]
    pub format: OutputFormat,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.optimizer.is_none() && self.sim.is_none() {
            return Err(CliError::Config(
                "config needs an optimizer section, a sim section, or both".to_string(),
            ));
        }
        if let Some(o) = &self.optimizer {
            o.validate().map_err(CliError::Lib)?;
        }
        if let Some(s) = &self.sim {
            s.validate().map_err(CliError::Lib)?;
        }
        Ok(())
    }

    /// Command-line overrides, applied before hashing so the manifest
    /// reflects what actually ran.
    pub fn apply_overrides(
        &mut self,
        seed: Option<u64>,
        trials: Option<u64>,
        out: Option<PathBuf>,
        format: Option<OutputFormat>,
    ) {
        if let Some(seed) = seed {
            if let Some(o) = self.optimizer.as_mut() {
                o.seed = seed;
            }
            if let Some(s) = self.sim.as_mut() {
                s.seed = seed;
            }
        }
        if let Some(trials) = trials {
            if let Some(s) = self.sim.as_mut() {
                s.trials = trials;
            }
        }
        if let Some(out) = out {
            self.output_path = out;
        }
        if let Some(format) = format {
            self.format = format;
        }
    }
}
