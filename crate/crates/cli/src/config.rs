//! Run configuration: a TOML file, `--set section.key=value` overrides on
//! top, then dedicated flags on top of that.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use seqbert::corpus::{SplitSpec, SplitUnit};
use seqbert::mlm::MaskingPolicy;
use seqbert::model::{FinetuneOptions, ModelConfig, OptimizerConfig, PhaseSpec, PretrainOptions};

use crate::UsageError;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub out_dir: Option<PathBuf>,
    pub corpus: CorpusSection,
    pub tokenizer: TokenizerSection,
    pub model: ModelConfig,
    pub optimizer: OptimizerConfig,
    pub masking: MaskingPolicy,
    pub pretrain: PretrainSection,
    pub finetune: FinetuneSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorpusSection {
    /// Raw-text file or directory.
    pub train: Option<PathBuf>,
    /// Separate dev corpus; when absent the train corpus is split.
    pub dev: Option<PathBuf>,
    pub train_fraction: f64,
    pub unit: SplitUnit,
}

impl Default for CorpusSection {
    fn default() -> Self {
        let s = SplitSpec::default();
        CorpusSection {
            train: None,
            dev: None,
            train_fraction: s.train_fraction,
            unit: s.unit,
        }
    }
}

impl CorpusSection {
    pub fn split_spec(&self) -> SplitSpec {
        SplitSpec {
            train_fraction: self.train_fraction,
            unit: self.unit,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TokenizerSection {
    /// Existing vocabulary; when absent one is trained on the train split.
    pub vocab: Option<PathBuf>,
    pub size: usize,
    pub min_frequency: u64,
}

impl Default for TokenizerSection {
    fn default() -> Self {
        TokenizerSection {
            vocab: None,
            size: 30_000,
            min_frequency: 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PretrainSection {
    pub phases: Vec<PhaseSpec>,
    pub eval_interval: u64,
    pub checkpoint_interval: u64,
    pub max_dev_rows: usize,
    pub break_at_documents: bool,
}

impl Default for PretrainSection {
    fn default() -> Self {
        let d = PretrainOptions::default();
        PretrainSection {
            phases: d.phases,
            eval_interval: d.eval_interval,
            checkpoint_interval: d.checkpoint_interval,
            max_dev_rows: d.max_dev_rows,
            break_at_documents: d.break_at_documents,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FinetuneSection {
    pub epochs: usize,
    pub batch_size: usize,
    pub patience: usize,
}

impl Default for FinetuneSection {
    fn default() -> Self {
        let d = FinetuneOptions::default();
        FinetuneSection {
            epochs: d.epochs,
            batch_size: d.batch_size,
            patience: d.patience,
        }
    }
}

impl RunConfig {
    /// Read `path` (if any), apply `overrides` in order and deserialize.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("cannot read config {}", p.display()))?;
                text.parse::<toml::Table>()
                    .map_err(|e| UsageError(format!("{}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let origin = path.map_or_else(|| "configuration".to_string(), |p| p.display().to_string());
        let config: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e| UsageError(format!("{origin}: {e}")))?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }
}

/// Set `section.key=value`; the value is parsed as a TOML value and taken
/// as a bare string when that fails.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| UsageError(format!("override {assignment:?} is not of the form key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(UsageError(format!("bad override key {key:?}")).into());
    }
    let mut cur = table;
    for p in &parts[..parts.len() - 1] {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| UsageError(format!("override {key:?}: {p} is not a section")))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}
