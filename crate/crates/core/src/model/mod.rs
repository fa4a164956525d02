//! Transformer encoder with exact hand-written gradients.
//!
//! Post-layer-norm BERT-style stack: learned token and position
//! embeddings, then per layer multi-head self-attention with a padding
//! mask, residual + layer norm, a GELU feed-forward block, residual +
//! layer norm. Two heads sit on top: a masked-LM head tied to the token
//! embeddings, and a per-token softmax classifier.

mod checkpoint;
mod encoder;
mod optim;
mod params;
mod scalar;
mod train;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use checkpoint::{load_checkpoint, save_checkpoint, ModelCheckpoint, TrainingState};
pub use encoder::{
    classifier_logits, classify_loss, forward, gelu, loss_and_gradients, mlm_logits, mlm_loss, objective_loss,
    EncoderInput, ForwardOutput, Head, LossValue, Objective,
};
pub use optim::{adam_step, lr_multiplier, AdamState, OptimizerConfig, Schedule};
pub use params::{init_model, EncoderLayer, LayerNorm, Linear, Params, TensorInfo};
pub use scalar::Scalar;
pub use train::{
    finetune, labeled_sentences, predict_labels, predict_many, pretrain, EpochRecord, FinetuneOptions, FinetuneOutcome,
    LabeledSentence, MetricRow, PhaseSpec, PretrainOptions, PretrainOutcome, TaskData,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub n_layers: usize,
    pub hidden: usize,
    pub n_heads: usize,
    pub ffn_size: usize,
    pub vocab_size: usize,
    pub max_positions: usize,
    pub dropout: f64,
    pub layer_norm_eps: f64,
}

impl Default for ModelConfig {
    /// Desk-scale defaults.
    fn default() -> Self {
        ModelConfig {
            n_layers: 2,
            hidden: 64,
            n_heads: 4,
            ffn_size: 256,
            vocab_size: 0,
            max_positions: 128,
            dropout: 0.1,
            layer_norm_eps: 1e-12,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.n_layers == 0 || self.hidden == 0 || self.n_heads == 0 || self.ffn_size == 0 {
            return fail("layer count, hidden size, head count and ffn size must be positive".into());
        }
        if !self.hidden.is_multiple_of(self.n_heads) {
            return fail(format!(
                "hidden size {} is not divisible by {} heads",
                self.hidden, self.n_heads
            ));
        }
        if self.vocab_size <= crate::tokenizer::NUM_SPECIALS {
            return fail(format!("vocabulary size {} is too small", self.vocab_size));
        }
        if self.max_positions == 0 {
            return fail("max_positions must be positive".into());
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return fail(format!("dropout {} must lie in [0, 1)", self.dropout));
        }
        if self.layer_norm_eps.is_nan() || self.layer_norm_eps < 0.0 {
            return fail("layer_norm_eps must be non-negative".into());
        }
        Ok(())
    }

    pub fn head_dim(&self) -> usize {
        self.hidden / self.n_heads
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    Upos,
    Fpos,
    Ner,
    DepBracket,
}

impl std::str::FromStr for TaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "upos" => Ok(TaskKind::Upos),
            "fpos" | "xpos" => Ok(TaskKind::Fpos),
            "ner" => Ok(TaskKind::Ner),
            "dep" | "dep-bracket" => Ok(TaskKind::DepBracket),
            other => Err(Error::InvalidArgument(format!("unknown task {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSet {
    pub kind: TaskKind,
    labels: Vec<String>,
}

impl LabelSet {
    pub fn new(kind: TaskKind, labels: Vec<String>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for l in &labels {
            if !seen.insert(l) {
                return Err(Error::Config(format!("duplicate label {l:?}")));
            }
        }
        if labels.is_empty() {
            return Err(Error::Config("label set is empty".into()));
        }
        Ok(LabelSet { kind, labels })
    }

    /// Sorted set of every label occurring in the given sequences.
    pub fn from_sequences<'a, I>(kind: TaskKind, seqs: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [String]>,
    {
        let set: std::collections::BTreeSet<&String> = seqs.into_iter().flatten().collect();
        Self::new(kind, set.into_iter().cloned().collect())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn id(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn label(&self, id: usize) -> Option<&str> {
        self.labels.get(id).map(String::as_str)
    }
}
