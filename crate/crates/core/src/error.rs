use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: invalid UTF-8 at byte offset {offset}")]
    InvalidUtf8 { path: PathBuf, offset: usize },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid corpus: {0}")]
    Corpus(String),

    #[error("target vocabulary size {requested} is too small, at least {required} pieces are needed")]
    VocabTooSmall { requested: usize, required: usize },

    #[error("invalid vocabulary: {0}")]
    Vocab(String),

    #[error("token id {id} out of range for vocabulary of size {size}")]
    TokenOutOfRange { id: u32, size: usize },

    #[error("invalid masking policy: {0}")]
    Policy(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("empty loss mask, nothing to score")]
    EmptyLossMask,

    #[error("label id {id} out of range for label set of size {size}")]
    LabelOutOfRange { id: usize, size: usize },

    #[error("labels absent from the label set: {0:?}")]
    UnknownLabels(Vec<String>),

    #[error("non-finite value in layer {layer}")]
    NonFinite { layer: usize },

    #[error("dev perplexity is NaN at step {step}")]
    NanPerplexity { step: u64 },

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("vocabulary fingerprint mismatch: checkpoint {expected:016x}, supplied {actual:016x}")]
    FingerprintMismatch { expected: u64, actual: u64 },

    #[error("invalid dependency tree: {0}")]
    Tree(String),

    #[error("tree is not projective")]
    NonProjective,

    #[error("invalid bracket label {0:?}")]
    BracketLabel(String),

    #[error("length mismatch in sentence {sentence}: gold {gold}, predicted {pred}")]
    LengthMismatch { sentence: usize, gold: usize, pred: usize },

    #[error("corpora are misaligned: {0}")]
    Misaligned(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("degenerate sample: all paired differences are identical (mean difference {mean_diff})")]
    DegenerateSample { mean_diff: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
