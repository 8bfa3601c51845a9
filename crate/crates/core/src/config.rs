//! TOML pipeline configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::EvalConfig;
use crate::features::FeatureConfig;
use crate::interp::{default_param_table, ParamTable, JOINED_PARAMETERS, KRIGED_PARAMETERS};
use crate::model::ModelConfig;
use crate::synth::SyntheticSpec;
use crate::time::{Hour, HourSpan};

/// Input files. Relative paths resolve against the config file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    pub outages: PathBuf,
    pub weather: PathBuf,
    pub stations: PathBuf,
    pub statics: PathBuf,
    pub adjacency: PathBuf,
    pub external_events: PathBuf,
}

impl Default for PathsConfig {
    fn default() -> Self {
        PathsConfig {
            outages: "outages.csv".into(),
            weather: "weather.csv".into(),
            stations: "stations.csv".into(),
            statics: "statics.csv".into(),
            adjacency: "adjacency.csv".into(),
            external_events: "external_events.csv".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpansConfig {
    pub train_start: String,
    pub train_hours: usize,
    pub test_start: String,
    pub test_hours: usize,
}

impl Default for SpansConfig {
    fn default() -> Self {
        SpansConfig {
            train_start: "2021-06-01T00:00:00Z".into(),
            train_hours: 2208,
            test_start: "2021-09-01T00:00:00Z".into(),
            test_hours: 2208,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    /// Forecast lead in hours; must match `features.horizon`.
    pub horizon: usize,
    pub paths: PathsConfig,
    pub spans: SpansConfig,
    /// Per-parameter overrides of the built-in interpolation table.
    #[serde(deserialize_with = "crate::interp::deserialize_param_overrides")]
    pub interp: ParamTable,
    pub features: FeatureConfig,
    pub model: ModelConfig,
    pub eval: EvalConfig,
    pub synthetic: SyntheticSpec,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 42,
            horizon: 48,
            paths: PathsConfig::default(),
            spans: SpansConfig::default(),
            interp: default_param_table(),
            features: FeatureConfig::default(),
            model: ModelConfig::default(),
            eval: EvalConfig::default(),
            synthetic: SyntheticSpec::default(),
            base_dir: PathBuf::new(),
        }
    }
}

impl PipelineConfig {
    /// Defaults with spans matching `spec`.
    pub fn for_synthetic(spec: &SyntheticSpec) -> Result<Self> {
        let mut cfg = PipelineConfig { synthetic: spec.clone(), ..Default::default() };
        let (train, test) = (spec.train_span()?, spec.test_span()?);
        cfg.spans = SpansConfig {
            train_start: train.start.to_string(),
            train_hours: train.len,
            test_start: test.start.to_string(),
            test_hours: test.len,
        };
        cfg.horizon = spec.lead_hours;
        cfg.features.horizon = spec.lead_hours;
        Ok(cfg)
    }

    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(format!("{origin}: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(format!("serialising config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::MissingArtifact(path.to_path_buf()),
            _ => Error::Io(e),
        })?;
        let mut cfg = Self::from_toml_str(&text, &path.display().to_string())?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)?;
            }
        }
        std::fs::write(path, self.to_toml_string()?)?;
        Ok(())
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn train_span(&self) -> Result<HourSpan> {
        let s = Hour::parse(&self.spans.train_start).map_err(|e| Error::Config(format!("spans.train_start: {e}")))?;
        Ok(HourSpan::new(s, self.spans.train_hours))
    }

    pub fn test_span(&self) -> Result<HourSpan> {
        let s = Hour::parse(&self.spans.test_start).map_err(|e| Error::Config(format!("spans.test_start: {e}")))?;
        Ok(HourSpan::new(s, self.spans.test_hours))
    }

    /// Hours from the train start to the test end.
    pub fn season_span(&self) -> Result<HourSpan> {
        let (train, test) = (self.train_span()?, self.test_span()?);
        Ok(HourSpan::new(train.start, (test.end().0 - train.start.0) as usize))
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be positive".into()));
        }
        if self.features.horizon != self.horizon {
            return Err(Error::Config(format!(
                "features.horizon ({}) must equal horizon ({})",
                self.features.horizon, self.horizon
            )));
        }
        let (train, test) = (self.train_span()?, self.test_span()?);
        if train.len == 0 || test.len == 0 {
            return Err(Error::Config("spans.train_hours and spans.test_hours must be positive".into()));
        }
        if train.end() > test.start {
            return Err(Error::Config(format!(
                "train span (ends {}) must precede test span (starts {})",
                train.end(),
                test.start
            )));
        }
        for (name, p) in &self.interp {
            if !KRIGED_PARAMETERS.contains(&name.as_str()) && !JOINED_PARAMETERS.contains(&name.as_str()) {
                return Err(Error::Config(format!("unknown interpolation parameter `{name}`")));
            }
            p.validate(name)?;
        }
        self.features.validate()?;
        self.model.validate()?;
        self.eval.validate()?;
        self.synthetic.validate()?;
        Ok(())
    }
}
