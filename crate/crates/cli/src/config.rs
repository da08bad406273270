//! Run configuration: a JSON file whose values command-line flags override.

use std::path::{Path, PathBuf};

use hybrid_select::featgen::{FeatureRecipe, TARGET};
use hybrid_select::pipeline::PipelineConfig;
use hybrid_select::rng::{label_key, substream};
use hybrid_select::simgen::SimConfig;
use hybrid_select::{Error, Result};
use serde::{Deserialize, Serialize};

/// Environment variable that overrides the configured output directory.
pub const OUT_ENV: &str = "HYBRID_SELECT_OUT";
pub const DEFAULT_OUT: &str = "hybrid-select-out";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    /// JSON schema for the input CSV. Without one, raw inputs use the
    /// insurance schema and engineered inputs treat every column as numeric.
    pub schema: Option<PathBuf>,
    /// Target column; defaults to `TravelInsurance`.
    pub target: Option<String>,
    /// Input holds raw insurance attributes; features are engineered on the
    /// training split only.
    pub raw: bool,
    /// Required. No run ever seeds itself from the clock.
    pub seed: Option<u64>,
    pub test_fraction: f64,
    pub output_dir: Option<PathBuf>,
    pub recipe: FeatureRecipe,
    pub matrix: PipelineConfig,
    /// Emit AUC-versus-number-of-variables curves for the penalized models.
    pub curves: bool,
    pub simulation: SimConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: None,
            schema: None,
            target: None,
            raw: false,
            seed: None,
            test_fraction: 0.2,
            output_dir: None,
            recipe: FeatureRecipe::default(),
            matrix: PipelineConfig::default(),
            curves: true,
            simulation: SimConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<RunConfig> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("invalid config {}: {e}", path.display())))
    }

    pub fn seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::Config("a seed is required (`--seed` or `seed` in the config)".into()))
    }

    pub fn target(&self) -> &str {
        self.target.as_deref().unwrap_or(TARGET)
    }

    pub fn split_seed(&self) -> Result<u64> {
        Ok(substream(self.seed()?, &[label_key("split")]))
    }

    /// Flag, then environment, then config file, then the default.
    pub fn output_dir(&self, flag: Option<&Path>) -> PathBuf {
        if let Some(p) = flag {
            return p.to_path_buf();
        }
        if let Some(p) = std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()) {
            return PathBuf::from(p);
        }
        self.output_dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
    }

    /// Checks shared by the commands that read an input file.
    pub fn validate_input(&self) -> Result<&Path> {
        let input = self
            .input
            .as_deref()
            .ok_or_else(|| Error::Config("no input file given (`--input` or `input`)".into()))?;
        if !input.is_file() {
            return Err(Error::Config(format!("input {} does not exist", input.display())));
        }
        if let Some(s) = &self.schema {
            if !s.is_file() {
                return Err(Error::Config(format!("schema {} does not exist", s.display())));
            }
        }
        Ok(input)
    }

    pub fn validate_matrix(&self) -> Result<()> {
        self.seed()?;
        self.validate_input()?;
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::Config("test_fraction must lie strictly between 0 and 1".into()));
        }
        if self.raw {
            self.recipe.validate()?;
        }
        self.matrix.validate()
    }
}
