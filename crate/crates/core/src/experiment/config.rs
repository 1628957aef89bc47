use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{ExperimentError, Result};
use crate::data::{PipelineSpec, SyntheticSpec};
use crate::federated::{FederationConfig, Strategy};
use crate::gbdt::BoostConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DataFormat {
    /// Questionnaire + score table, run through the preprocessing pipeline.
    #[default]
    Raw,
    /// Output of `preprocess`, read as is.
    Processed,
}

/// Where the rows come from: a file at `path`, or a generated table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub path: Option<PathBuf>,
    pub format: DataFormat,
    pub synthetic: Option<SyntheticSpec>,
    /// Delimiter of raw input files (processed files are comma-separated).
    pub delimiter: String,
    /// Rows per chunk when streaming a raw file.
    pub chunk_size: usize,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            path: None,
            format: DataFormat::Raw,
            synthetic: None,
            delimiter: ";".into(),
            chunk_size: 100_000,
        }
    }
}

impl DataConfig {
    /// Used when a config has no `[data]` section: the generator defaults.
    pub fn desk_scale() -> Self {
        Self {
            synthetic: Some(SyntheticSpec::default()),
            ..Self::default()
        }
    }

    pub fn delimiter_byte(&self) -> Result<u8> {
        match self.delimiter.as_bytes() {
            [b] => Ok(*b),
            _ => Err(ExperimentError::Config(format!(
                "delimiter must be a single byte, got {:?}",
                self.delimiter
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub test_fraction: f64,
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            test_fraction: 0.2,
            seed: 42,
        }
    }
}

/// School filtering and sampling for the federated arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PartitionConfig {
    pub min_rows: usize,
    pub sample_size: usize,
    pub seed: u64,
}

impl Default for PartitionConfig {
    fn default() -> Self {
        Self {
            min_rows: 20,
            sample_size: 50,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Write the global model after every federated round.
    pub checkpoints: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("results"),
            checkpoints: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "DataConfig::desk_scale")]
    pub data: DataConfig,
    pub pipeline: PipelineSpec,
    pub split: SplitConfig,
    pub partition: PartitionConfig,
    pub federation: FederationConfig,
    pub boost: BoostConfig,
    pub output: OutputConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            data: DataConfig::desk_scale(),
            pipeline: PipelineSpec::default(),
            split: SplitConfig::default(),
            partition: PartitionConfig::default(),
            federation: FederationConfig::default(),
            boost: BoostConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

/// Command-line overrides applied on top of a loaded config.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    /// Replaces every seed in the config.
    pub seed: Option<u64>,
    pub rounds: Option<usize>,
    pub mu: Option<f64>,
    /// Number of schools sampled as clients.
    pub clients: Option<usize>,
    pub min_rows: Option<usize>,
    pub fedavg: bool,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| ExperimentError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(dir) = &o.out {
            self.output.dir = dir.clone();
        }
        if let Some(seed) = o.seed {
            self.split.seed = seed;
            self.partition.seed = seed;
            self.federation.seed = seed;
            self.federation.train.seed = seed;
            self.boost.seed = seed;
            if let Some(s) = &mut self.data.synthetic {
                s.seed = seed;
            }
        }
        if let Some(t) = o.rounds {
            self.federation.num_rounds = t;
        }
        if let Some(mu) = o.mu {
            self.federation.proximal_mu = mu;
        }
        if let Some(k) = o.clients {
            self.partition.sample_size = k;
        }
        if let Some(m) = o.min_rows {
            self.partition.min_rows = m;
        }
        if o.fedavg {
            self.federation.strategy = Strategy::FedAvg;
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(ExperimentError::Config(m));
        match (&self.data.path, &self.data.synthetic) {
            (Some(_), Some(_)) => return bad("set either data.path or data.synthetic, not both".into()),
            (None, None) => return bad("one of data.path or data.synthetic is required".into()),
            _ => {}
        }
        self.data.delimiter_byte()?;
        if self.data.chunk_size == 0 {
            return bad("data.chunk_size must be positive".into());
        }
        if let Some(s) = &self.data.synthetic {
            if s.schools == 0 || s.min_rows == 0 || s.min_rows > s.max_rows {
                return bad("synthetic: need schools > 0 and 0 < min_rows <= max_rows".into());
            }
            if s.category_counts.len() != self.pipeline.feature_columns.len() {
                return bad(format!(
                    "synthetic has {} category columns but the pipeline lists {} features",
                    s.category_counts.len(),
                    self.pipeline.feature_columns.len()
                ));
            }
        }
        if !(self.split.test_fraction > 0.0 && self.split.test_fraction < 1.0) {
            return bad(format!(
                "split.test_fraction must lie in (0, 1), got {}",
                self.split.test_fraction
            ));
        }
        if self.partition.min_rows == 0 || self.partition.sample_size == 0 {
            return bad("partition.min_rows and partition.sample_size must be positive".into());
        }
        if self.federation.num_rounds == 0 {
            return bad("federation.num_rounds must be positive".into());
        }
        self.pipeline.validate()?;
        self.federation.validate()?;
        self.boost.validate()?;
        Ok(())
    }
}
