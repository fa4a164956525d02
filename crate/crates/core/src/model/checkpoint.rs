//! Binary checkpoint format.
//!
//! ```text
//! magic "SQBTCKPT" | version u32 | header length u64 | header JSON
//! tensor count u32 | per tensor: name length u16, name, rank u8, dims u32…
//! tensor data, little-endian f32, in manifest order
//! ```
//!
//! All integers are little-endian. The manifest lists the parameters in
//! canonical order followed by `adam.m.*` and `adam.v.*` when optimizer
//! moments are stored.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::optim::{AdamState, OptimizerConfig};
use super::params::Params;
use super::{LabelSet, ModelConfig};
use crate::error::{Error, Result};
use crate::tokenizer::Vocab;

const MAGIC: &[u8; 8] = b"SQBTCKPT";
const VERSION: u32 = 1;

/// Progress needed to continue training exactly where it stopped. All
/// random streams are derived from `seed` and `step`, so no generator state
/// is stored.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingState {
    pub step: u64,
    pub seed: u64,
    /// Training loss accumulated since the last metrics row.
    pub window_loss: f64,
    pub window_count: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelCheckpoint {
    pub config: ModelConfig,
    pub labels: Option<LabelSet>,
    pub vocab_fingerprint: u64,
    pub optimizer: OptimizerConfig,
    pub state: TrainingState,
    pub params: Params<f32>,
    pub moments: Option<AdamState<f32>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    config: ModelConfig,
    labels: Option<LabelSet>,
    vocab_fingerprint: String,
    optimizer: OptimizerConfig,
    state: TrainingState,
    has_moments: bool,
}

impl ModelCheckpoint {
    fn manifest(&self) -> Vec<(String, Vec<usize>)> {
        let infos = self.params.tensor_infos();
        let mut out: Vec<(String, Vec<usize>)> = infos.iter().map(|i| (i.name.clone(), i.shape.clone())).collect();
        if self.moments.is_some() {
            for prefix in ["adam.m.", "adam.v."] {
                out.extend(infos.iter().map(|i| (format!("{prefix}{}", i.name), i.shape.clone())));
            }
        }
        out
    }

    fn data(&self) -> Vec<&[f32]> {
        let mut out = self.params.tensors();
        if let Some(m) = &self.moments {
            out.extend(m.m.iter().map(Vec::as_slice));
            out.extend(m.v.iter().map(Vec::as_slice));
        }
        out
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let header = Header {
            config: self.config.clone(),
            labels: self.labels.clone(),
            vocab_fingerprint: format!("{:016x}", self.vocab_fingerprint),
            optimizer: self.optimizer.clone(),
            state: self.state.clone(),
            has_moments: self.moments.is_some(),
        };
        let json = serde_json::to_vec(&header).map_err(|e| Error::Checkpoint(e.to_string()))?;
        let manifest = self.manifest();
        let data = self.data();
        if data.len() != manifest.len() {
            return Err(Error::Checkpoint(
                "optimizer moments do not match the parameters".into(),
            ));
        }
        let mut out = Vec::with_capacity(self.params.n_params() * 12 + json.len() + 1024);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(json.len() as u64).to_le_bytes());
        out.extend_from_slice(&json);
        out.extend_from_slice(&(manifest.len() as u32).to_le_bytes());
        for (name, shape) in &manifest {
            out.extend_from_slice(&(name.len() as u16).to_le_bytes());
            out.extend_from_slice(name.as_bytes());
            out.push(shape.len() as u8);
            for &d in shape {
                out.extend_from_slice(&(d as u32).to_le_bytes());
            }
        }
        for ((name, shape), t) in manifest.iter().zip(data) {
            if t.len() != shape.iter().product::<usize>() {
                return Err(Error::Checkpoint(format!("tensor {name} does not match its shape")));
            }
            for v in t {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(Error::Checkpoint("not a checkpoint file (bad magic)".into()));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::Checkpoint(format!("unsupported checkpoint version {version}")));
        }
        let len = usize::try_from(r.u64()?).map_err(|_| Error::Checkpoint("header too large".into()))?;
        let header: Header =
            serde_json::from_slice(r.take(len)?).map_err(|e| Error::Checkpoint(format!("bad header: {e}")))?;
        header.config.validate()?;
        let vocab_fingerprint = u64::from_str_radix(&header.vocab_fingerprint, 16)
            .map_err(|_| Error::Checkpoint("bad vocabulary fingerprint".into()))?;
        let mut params = Params::<f32>::zeros(&header.config);
        if let Some(labels) = &header.labels {
            params.attach_classifier(labels.len(), 0);
        }
        let mut ckpt = ModelCheckpoint {
            config: header.config,
            labels: header.labels,
            vocab_fingerprint,
            optimizer: header.optimizer,
            state: header.state,
            moments: header.has_moments.then(|| AdamState::new(&params)),
            params,
        };
        let expected = ckpt.manifest();
        let count = r.u32()? as usize;
        if count != expected.len() {
            return Err(Error::Checkpoint(format!(
                "manifest lists {count} tensors, expected {}",
                expected.len()
            )));
        }
        for (name, shape) in &expected {
            let n = r.u16()? as usize;
            let got_name = std::str::from_utf8(r.take(n)?).map_err(|_| Error::Checkpoint("bad tensor name".into()))?;
            let rank = r.take(1)?[0] as usize;
            let dims = (0..rank)
                .map(|_| r.u32().map(|d| d as usize))
                .collect::<Result<Vec<_>>>()?;
            if got_name != name || &dims != shape {
                return Err(Error::Checkpoint(format!(
                    "manifest entry {got_name} {dims:?} does not match expected {name} {shape:?}"
                )));
            }
        }
        let mut targets = ckpt.params.tensors_mut();
        if let Some(m) = &mut ckpt.moments {
            targets.extend(m.m.iter_mut().map(Vec::as_mut_slice));
            targets.extend(m.v.iter_mut().map(Vec::as_mut_slice));
        }
        for t in targets {
            let raw = r.take(t.len() * 4)?;
            for (v, c) in t.iter_mut().zip(raw.chunks_exact(4)) {
                *v = f32::from_le_bytes(c.try_into().expect("chunk of four bytes"));
            }
        }
        if r.pos != bytes.len() {
            return Err(Error::Checkpoint(format!(
                "{} trailing bytes after tensor data",
                bytes.len() - r.pos
            )));
        }
        Ok(ckpt)
    }

    pub fn check_vocab(&self, vocab: &Vocab) -> Result<()> {
        let actual = vocab.fingerprint();
        if actual != self.vocab_fingerprint {
            return Err(Error::FingerprintMismatch {
                expected: self.vocab_fingerprint,
                actual,
            });
        }
        Ok(())
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::Checkpoint(format!("file truncated at byte {}", self.bytes.len())))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("two bytes")))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("four bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("eight bytes")))
    }
}

pub fn save_checkpoint(ckpt: &ModelCheckpoint, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = ckpt.to_bytes()?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Read a checkpoint; with `vocab` given, its fingerprint must match.
pub fn load_checkpoint(path: impl AsRef<Path>, vocab: Option<&Vocab>) -> Result<ModelCheckpoint> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let ckpt = ModelCheckpoint::from_bytes(&bytes)?;
    if let Some(v) = vocab {
        ckpt.check_vocab(v)?;
    }
    Ok(ckpt)
}
