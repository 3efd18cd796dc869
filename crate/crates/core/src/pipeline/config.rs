use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::datamodel::SynthSpec;
use crate::distill::{KdConfig, QueryMode};
use crate::dpsgd::{AwdpConfig, DpConfig};
use crate::error::{Error, Result};
use crate::features::FrontEndConfig;
use crate::model::ModelConfig;

/// Where the examples come from and how they are split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub n_priv: usize,
    pub n_aux: usize,
    /// Held-out evaluation examples taken from what the split leaves over.
    pub n_test: usize,
    /// Existing dataset manifest to split instead of generating synthetic data.
    pub manifest: Option<PathBuf>,
    /// Synthetic generator settings; `n` is replaced by `n_priv + n_aux + n_test`.
    pub synth: SynthSpec,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            n_priv: 20_000,
            n_aux: 5_000,
            n_test: 2_000,
            manifest: None,
            synth: SynthSpec::default(),
        }
    }
}

/// Every setting of a pipeline run. Defaults are the full-scale core settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed for data generation, splitting, teacher and student training.
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Privileged-modality dropout probability during teacher training.
    pub dropout: f64,
    /// How the teacher is queried when labeling the auxiliary set.
    pub query_mode: QueryMode,
    pub frontend: FrontEndConfig,
    pub data: DataConfig,
    pub model: ModelConfig,
    pub dp: DpConfig,
    pub awdp: AwdpConfig,
    pub kd: KdConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            out_dir: PathBuf::from("run"),
            dropout: 0.5,
            query_mode: QueryMode::AudioOnly,
            frontend: FrontEndConfig::default(),
            data: DataConfig::default(),
            model: ModelConfig::default(),
            dp: DpConfig::default(),
            awdp: AwdpConfig::default(),
            kd: KdConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.finish()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    /// Applies `key.path=value` overrides, where `value` is a TOML literal or a bare string.
    pub fn with_overrides<S: AsRef<str>>(self, overrides: &[S]) -> Result<Self> {
        if overrides.is_empty() {
            return self.finish();
        }
        let mut root =
            toml::Value::try_from(&self).map_err(|e| Error::InvalidConfig(format!("cannot serialize config: {e}")))?;
        for item in overrides {
            let item = item.as_ref();
            let (key, raw) = item
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("override `{item}` is not key=value")))?;
            let value = parse_literal(raw.trim());
            set_path(&mut root, key.trim(), value)?;
        }
        let cfg: RunConfig = root
            .try_into()
            .map_err(|e: toml::de::Error| Error::InvalidConfig(e.to_string()))?;
        cfg.finish()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Propagates the master seed and derived sizes, then checks consistency.
    fn finish(mut self) -> Result<Self> {
        self.dp.seed = self.seed;
        self.kd.seed = self.seed;
        self.data.synth.n = self.data.n_priv + self.data.n_aux + self.data.n_test;
        self.validate()?;
        Ok(self)
    }

    pub fn num_classes(&self) -> usize {
        self.data.synth.num_classes
    }

    fn validate(&self) -> Result<()> {
        self.dp.validate()?;
        self.awdp.validate()?;
        self.kd.validate()?;
        if !(0.0..=1.0).contains(&self.dropout) {
            return Err(Error::InvalidConfig(format!("dropout {} outside [0, 1]", self.dropout)));
        }
        if self.data.manifest.is_none() && self.frontend.n_mels != self.data.synth.n_mels {
            return Err(Error::InvalidConfig(format!(
                "front-end expects {} Mel bands, synthetic data has {}",
                self.frontend.n_mels, self.data.synth.n_mels
            )));
        }
        if self.data.n_priv == 0 || self.data.n_aux == 0 {
            return Err(Error::InvalidConfig("n_priv and n_aux must be positive".into()));
        }
        Ok(())
    }
}

fn parse_literal(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

fn set_path(root: &mut toml::Value, key: &str, value: toml::Value) -> Result<()> {
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let table = node
            .as_table_mut()
            .ok_or_else(|| Error::InvalidConfig(format!("`{key}`: `{part}` is not inside a table")))?;
        if i + 1 == parts.len() {
            table.insert(part.to_string(), value);
            return Ok(());
        }
        node = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(Default::default()));
    }
    Err(Error::InvalidConfig("empty override key".into()))
}
