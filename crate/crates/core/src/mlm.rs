//! Masked-language-model batches.
//!
//! Token streams are packed into fixed-length rows (`[CLS]` + content +
//! `[SEP]`, padded), and each eligible position is independently selected
//! for prediction and corrupted according to a [`MaskingPolicy`].

use std::io::{self, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::DocumentSet;
use crate::error::{Error, Result};
use crate::seed;
use crate::tokenizer::{self, Vocab, CLS, MASK, NUM_SPECIALS, PAD, SEP};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MaskingPolicy {
    pub select_rate: f64,
    pub mask_rate: f64,
    pub random_rate: f64,
    pub keep_rate: f64,
}

impl Default for MaskingPolicy {
    fn default() -> Self {
        MaskingPolicy {
            select_rate: 0.15,
            mask_rate: 0.80,
            random_rate: 0.10,
            keep_rate: 0.10,
        }
    }
}

impl MaskingPolicy {
    pub fn validate(&self) -> Result<()> {
        let rates = [self.select_rate, self.mask_rate, self.random_rate, self.keep_rate];
        if rates.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return Err(Error::Policy(format!("rates must lie in [0, 1]: {self:?}")));
        }
        let total = self.mask_rate + self.random_rate + self.keep_rate;
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Policy(format!(
                "mask + random + keep rates sum to {total}, expected 1"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaskedBatch {
    pub batch: usize,
    pub seq_len: usize,
    /// Row-major `[batch, seq_len]` matrices.
    pub input_ids: Vec<u32>,
    pub target_ids: Vec<u32>,
    pub loss_mask: Vec<bool>,
    pub attention_mask: Vec<bool>,
}

impl MaskedBatch {
    pub fn selected(&self) -> usize {
        self.loss_mask.iter().filter(|&&m| m).count()
    }

    /// Debug dump: `batch`, `seq_len`, then the four matrices
    /// (input ids, target ids, loss mask, attention mask) as row-major
    /// little-endian `u32` values, masks encoded as 0/1.
    pub fn write_binary<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(&(self.batch as u32).to_le_bytes())?;
        w.write_all(&(self.seq_len as u32).to_le_bytes())?;
        for &id in self.input_ids.iter().chain(&self.target_ids) {
            w.write_all(&id.to_le_bytes())?;
        }
        for &m in self.loss_mask.iter().chain(&self.attention_mask) {
            w.write_all(&(m as u32).to_le_bytes())?;
        }
        Ok(())
    }
}

/// Piece ids of one document: every non-empty line pre-tokenized and
/// segmented, concatenated in order.
pub fn document_stream(vocab: &Vocab, text: &str) -> Vec<u32> {
    let mut ids = Vec::new();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        for word in tokenizer::pre_tokenize(line) {
            ids.extend(tokenizer::encode_word(vocab, &word));
        }
    }
    ids
}

pub fn corpus_streams(vocab: &Vocab, docs: &DocumentSet) -> Vec<Vec<u32>> {
    docs.iter().map(|d| document_stream(vocab, &d.text)).collect()
}

/// Chop token streams into rows of exactly `seq_len` ids:
/// `[CLS]`, up to `seq_len - 2` content pieces, `[SEP]`, then `[PAD]`.
///
/// Streams are concatenated unless `break_at_documents` is set, in which
/// case every stream starts a fresh row.
pub fn pack_sequences(streams: &[Vec<u32>], seq_len: usize, break_at_documents: bool) -> Result<Vec<Vec<u32>>> {
    if seq_len < 8 {
        return Err(Error::InvalidArgument(format!(
            "sequence length must be at least 8, got {seq_len}"
        )));
    }
    let content = seq_len - 2;
    let finish = |chunk: &[u32]| {
        let mut row = Vec::with_capacity(seq_len);
        row.push(CLS);
        row.extend_from_slice(chunk);
        row.push(SEP);
        row.resize(seq_len, PAD);
        row
    };
    let mut rows = Vec::new();
    if break_at_documents {
        for s in streams {
            rows.extend(s.chunks(content).map(finish));
        }
    } else {
        let all: Vec<u32> = streams.iter().flatten().copied().collect();
        rows.extend(all.chunks(content).map(finish));
    }
    Ok(rows)
}

/// Apply the masking policy to packed rows.
///
/// Row `r` draws from its own stream derived from `(seed, r)`, so the
/// result does not depend on how rows are scheduled.
pub fn mask_batch(rows: &[Vec<u32>], vocab: &Vocab, policy: &MaskingPolicy, seed: u64) -> Result<MaskedBatch> {
    policy.validate()?;
    if rows.is_empty() {
        return Err(Error::InvalidArgument("cannot mask an empty batch".into()));
    }
    if vocab.piece(MASK) != Some(tokenizer::SPECIAL_TOKENS[MASK as usize]) {
        return Err(Error::Vocab("vocabulary has no [MASK] token".into()));
    }
    if vocab.len() <= NUM_SPECIALS {
        return Err(Error::Vocab("vocabulary has no regular pieces".into()));
    }
    let seq_len = rows[0].len();
    if rows.iter().any(|r| r.len() != seq_len) {
        return Err(Error::Shape("rows of a batch must share one length".into()));
    }
    let n = rows.len() * seq_len;
    let mut out = MaskedBatch {
        batch: rows.len(),
        seq_len,
        input_ids: Vec::with_capacity(n),
        target_ids: Vec::with_capacity(n),
        loss_mask: Vec::with_capacity(n),
        attention_mask: Vec::with_capacity(n),
    };
    let random_cut = policy.mask_rate + policy.random_rate;
    for (r, row) in rows.iter().enumerate() {
        let mut rng = seed::rng(seed, &[seed::TAG_MASK, r as u64]);
        for &id in row {
            if (id as usize) >= vocab.len() {
                return Err(Error::TokenOutOfRange { id, size: vocab.len() });
            }
            out.target_ids.push(id);
            out.attention_mask.push(id != PAD);
            let eligible = !vocab.is_special(id);
            let selected = eligible && rng.gen::<f64>() < policy.select_rate;
            let input = if selected {
                let u: f64 = rng.gen();
                if u < policy.mask_rate {
                    MASK
                } else if u < random_cut {
                    rng.gen_range(NUM_SPECIALS as u32..vocab.len() as u32)
                } else {
                    id
                }
            } else {
                id
            };
            out.input_ids.push(input);
            out.loss_mask.push(selected);
        }
    }
    Ok(out)
}
