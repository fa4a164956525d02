//! Desk-scale monolingual BERT toolkit.
//!
//! The crate covers the whole pipeline for training a small transformer
//! encoder on raw text and adapting it to token-level tasks:
//!
//! * [`corpus`]: raw-text and annotated-data ingestion, prefix train/dev splits.
//! * [`tokenizer`]: cased WordPiece vocabulary training and greedy segmentation.
//! * [`mlm`]: sequence packing and masked-LM corruption.
//! * [`model`]: transformer encoder with hand-written backpropagation,
//!   Adam with decoupled weight decay, pre-training, fine-tuning and checkpoints.
//! * [`treecodec`]: bracketing encoding of projective dependency trees as
//!   per-word labels, with a total decoder.
//! * [`eval`]: POS accuracy, BIO span P/R/F1 and LAS/UAS.
//! * [`stats`]: paired t-test and stratified shuffling significance test.

pub mod corpus;
pub mod error;
pub mod eval;
pub mod mlm;
pub mod model;
pub mod seed;
pub mod stats;
pub mod tokenizer;
pub mod treecodec;

pub use error::{Error, Result};
