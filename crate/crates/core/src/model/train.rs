//! Pre-training and fine-tuning loops.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::checkpoint::{save_checkpoint, ModelCheckpoint, TrainingState};
use super::encoder::{classifier_logits, forward, loss_and_gradients, objective_loss, EncoderInput, Head, Objective};
use super::optim::{adam_step, lr_multiplier, AdamState, OptimizerConfig};
use super::params::{init_model, Params};
use super::{LabelSet, ModelConfig, TaskKind};
use crate::corpus::{AnnotatedSentence, DocumentSet};
use crate::error::{Error, Result};
use crate::mlm::{self, MaskedBatch, MaskingPolicy};
use crate::seed;
use crate::tokenizer::{encode_sentence, Vocab, PAD, SEP};
use crate::treecodec::{encode_tree, DepTree};

/// One pre-training phase: `steps` updates on batches of `batch_size`
/// rows of `seq_len` tokens.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseSpec {
    pub seq_len: usize,
    pub batch_size: usize,
    pub steps: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PretrainOptions {
    pub phases: Vec<PhaseSpec>,
    pub eval_interval: u64,
    /// Save a checkpoint every this many steps (0: only at the end).
    pub checkpoint_interval: u64,
    pub checkpoint_dir: Option<PathBuf>,
    /// Start a new row at every document boundary instead of packing
    /// documents back to back.
    pub break_at_documents: bool,
    /// Cap on the number of dev rows scored at each evaluation.
    pub max_dev_rows: usize,
    pub seed: u64,
    /// Stop (and checkpoint) after this global step.
    pub stop_after: Option<u64>,
}

impl Default for PretrainOptions {
    fn default() -> Self {
        PretrainOptions {
            phases: vec![PhaseSpec {
                seq_len: 128,
                batch_size: 96,
                steps: 1000,
            }],
            eval_interval: 100,
            checkpoint_interval: 0,
            checkpoint_dir: None,
            break_at_documents: false,
            max_dev_rows: 256,
            seed: 0,
            stop_after: None,
        }
    }
}

impl PretrainOptions {
    pub fn total_steps(&self) -> u64 {
        self.phases.iter().map(|p| p.steps).sum()
    }

    fn validate(&self, model: &ModelConfig) -> Result<()> {
        if self.phases.is_empty() {
            return Err(Error::Config("at least one pre-training phase is required".into()));
        }
        for (i, p) in self.phases.iter().enumerate() {
            if p.batch_size == 0 || p.steps == 0 {
                return Err(Error::Config(format!(
                    "phase {} needs positive batch size and steps",
                    i + 1
                )));
            }
            if p.seq_len > model.max_positions {
                return Err(Error::Config(format!(
                    "phase {} sequence length {} exceeds max_positions {}",
                    i + 1,
                    p.seq_len,
                    model.max_positions
                )));
            }
        }
        if self.eval_interval == 0 {
            return Err(Error::Config("eval_interval must be positive".into()));
        }
        if self.max_dev_rows == 0 {
            return Err(Error::Config("max_dev_rows must be positive".into()));
        }
        Ok(())
    }
}

/// One line of the pre-training metrics log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub step: u64,
    /// 1-based phase number.
    pub phase: usize,
    pub lr: f64,
    /// Mean training loss since the previous row; absent at step 0.
    pub train_loss: Option<f64>,
    pub dev_loss: f64,
    pub dev_perplexity: f64,
}

impl MetricRow {
    pub const HEADER: &'static str = "step,phase,lr,train_loss,dev_loss,dev_perplexity";

    pub fn csv_line(&self) -> String {
        let train = self.train_loss.map(|v| v.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{}",
            self.step, self.phase, self.lr, train, self.dev_loss, self.dev_perplexity
        )
    }

    /// Full CSV log, preceded by a comment recording the kernel thread count.
    pub fn csv(rows: &[MetricRow]) -> String {
        let mut out = format!("# threads=1\n{}\n", Self::HEADER);
        for r in rows {
            let _ = writeln!(out, "{}", r.csv_line());
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct PretrainOutcome {
    pub checkpoint: ModelCheckpoint,
    pub metrics: Vec<MetricRow>,
    /// Intermediate checkpoints written to `checkpoint_dir`.
    pub saved: Vec<PathBuf>,
}

struct PhaseData {
    rows: Vec<Vec<u32>>,
    dev: Vec<MaskedBatch>,
}

fn phase_data(
    train_streams: &[Vec<u32>],
    dev_streams: &[Vec<u32>],
    vocab: &Vocab,
    policy: &MaskingPolicy,
    options: &PretrainOptions,
    phase: usize,
) -> Result<PhaseData> {
    let spec = options.phases[phase];
    let rows = mlm::pack_sequences(train_streams, spec.seq_len, options.break_at_documents)?;
    if rows.is_empty() {
        return Err(Error::Corpus("training split has no tokens".into()));
    }
    let mut dev_rows = mlm::pack_sequences(dev_streams, spec.seq_len, options.break_at_documents)?;
    dev_rows.truncate(options.max_dev_rows);
    if dev_rows.is_empty() {
        return Err(Error::Corpus("dev split has no tokens".into()));
    }
    let dev_seed = seed::mix(options.seed, &[seed::TAG_DEV, phase as u64]);
    let dev = dev_rows
        .chunks(spec.batch_size)
        .enumerate()
        .map(|(k, chunk)| mlm::mask_batch(chunk, vocab, policy, seed::mix(dev_seed, &[k as u64])))
        .collect::<Result<Vec<_>>>()?;
    if dev.iter().all(|b| b.selected() == 0) {
        return Err(Error::Corpus("dev split yields no masked positions".into()));
    }
    Ok(PhaseData { rows, dev })
}

fn dev_loss(config: &ModelConfig, params: &Params<f32>, dev: &[MaskedBatch]) -> Result<(f64, f64)> {
    let mut total = 0.0;
    let mut count = 0usize;
    for b in dev.iter().filter(|b| b.selected() > 0) {
        let input = EncoderInput::from_masked(b);
        let v = objective_loss(
            config,
            params,
            &input,
            Objective::Mlm {
                targets: &b.target_ids,
                loss_mask: &b.loss_mask,
            },
        )?;
        total += v.total;
        count += v.count;
    }
    let mean = total / count as f64;
    Ok((mean, mean.exp()))
}

/// Rows of the `step`-th batch of a phase: consecutive slices of a fresh
/// seeded permutation per epoch.
fn batch_rows<'a>(
    rows: &'a [Vec<u32>],
    batch_size: usize,
    in_phase_step: u64,
    seed: u64,
    phase: usize,
    cache: &mut Option<(u64, Vec<usize>)>,
) -> Vec<&'a Vec<u32>> {
    let n = rows.len() as u64;
    (0..batch_size as u64)
        .map(|i| {
            let pos = in_phase_step * batch_size as u64 + i;
            let epoch = pos / n;
            if cache.as_ref().map(|c| c.0) != Some(epoch) {
                let mut perm: Vec<usize> = (0..rows.len()).collect();
                perm.shuffle(&mut seed::rng(seed, &[seed::TAG_ORDER, phase as u64, epoch]));
                *cache = Some((epoch, perm));
            }
            &rows[cache.as_ref().expect("permutation cached").1[(pos % n) as usize]]
        })
        .collect()
}

/// Masked-LM pre-training over a phase plan.
///
/// The learning-rate schedule spans all phases. Dev perplexity is logged
/// at step 0, every `eval_interval` steps and at the end of each phase.
/// With `resume`, training continues from the checkpoint's step and
/// produces exactly the rows and parameters an uninterrupted run would.
#[allow(clippy::too_many_arguments)]
pub fn pretrain(
    train: &DocumentSet,
    dev: &DocumentSet,
    vocab: &Vocab,
    model: &ModelConfig,
    optimizer: &OptimizerConfig,
    policy: &MaskingPolicy,
    options: &PretrainOptions,
    resume: Option<ModelCheckpoint>,
) -> Result<PretrainOutcome> {
    model.validate()?;
    policy.validate()?;
    options.validate(model)?;
    if model.vocab_size != vocab.len() {
        return Err(Error::Config(format!(
            "model vocab_size {} differs from the vocabulary size {}",
            model.vocab_size,
            vocab.len()
        )));
    }
    if train.is_empty() || dev.is_empty() {
        return Err(Error::Corpus(
            "pre-training needs non-empty train and dev splits".into(),
        ));
    }
    let total = options.total_steps();
    let opt = OptimizerConfig {
        total_steps: total,
        ..optimizer.clone()
    };
    opt.validate()?;

    let (mut params, mut moments, mut state) = match resume {
        Some(ckpt) => {
            ckpt.check_vocab(vocab)?;
            if &ckpt.config != model || ckpt.optimizer != opt || ckpt.state.seed != options.seed {
                return Err(Error::Checkpoint(
                    "checkpoint configuration, optimizer or seed differs from this run".into(),
                ));
            }
            let moments = ckpt
                .moments
                .ok_or_else(|| Error::Checkpoint("checkpoint has no optimizer state to resume from".into()))?;
            (ckpt.params, moments, ckpt.state)
        }
        None => {
            let params = init_model::<f32>(model, options.seed)?;
            let moments = AdamState::new(&params);
            let state = TrainingState {
                seed: options.seed,
                ..Default::default()
            };
            (params, moments, state)
        }
    };
    let stop = options.stop_after.unwrap_or(total).min(total);

    let train_streams = mlm::corpus_streams(vocab, train);
    let dev_streams = mlm::corpus_streams(vocab, dev);
    let mut metrics = Vec::new();
    let mut saved = Vec::new();
    let snapshot = |params: &Params<f32>, moments: &AdamState<f32>, state: &TrainingState| ModelCheckpoint {
        config: model.clone(),
        labels: None,
        vocab_fingerprint: vocab.fingerprint(),
        optimizer: opt.clone(),
        state: state.clone(),
        params: params.clone(),
        moments: Some(moments.clone()),
    };

    let mut phase_start = 0u64;
    for (phase, spec) in options.phases.iter().enumerate() {
        let phase_end = phase_start + spec.steps;
        if state.step >= phase_end {
            phase_start = phase_end;
            continue;
        }
        if state.step >= stop {
            break;
        }
        let data = phase_data(&train_streams, &dev_streams, vocab, policy, options, phase)?;
        let mut log = |step: u64, params: &Params<f32>, state: &mut TrainingState| -> Result<()> {
            let (loss, ppl) = dev_loss(model, params, &data.dev)?;
            if ppl.is_nan() {
                return Err(Error::NanPerplexity { step });
            }
            let train_loss = (state.window_count > 0).then(|| state.window_loss / state.window_count as f64);
            metrics.push(MetricRow {
                step,
                phase: phase + 1,
                lr: opt.learning_rate * lr_multiplier(&opt, step),
                train_loss,
                dev_loss: loss,
                dev_perplexity: ppl,
            });
            state.window_loss = 0.0;
            state.window_count = 0;
            Ok(())
        };
        if state.step == 0 && phase == 0 {
            log(0, &params, &mut state)?;
        }
        let mut order_cache = None;
        while state.step < phase_end.min(stop) {
            let step = state.step + 1;
            let rows = batch_rows(
                &data.rows,
                spec.batch_size,
                state.step - phase_start,
                options.seed,
                phase,
                &mut order_cache,
            );
            let rows: Vec<Vec<u32>> = rows.into_iter().cloned().collect();
            let batch = mlm::mask_batch(&rows, vocab, policy, seed::mix(options.seed, &[seed::TAG_MASK, step]))?;
            if batch.selected() > 0 {
                let input = EncoderInput::from_masked(&batch);
                let (value, grads) = loss_and_gradients(
                    model,
                    &params,
                    &input,
                    Objective::Mlm {
                        targets: &batch.target_ids,
                        loss_mask: &batch.loss_mask,
                    },
                    Some(seed::mix(options.seed, &[seed::TAG_DROPOUT, step])),
                )?;
                adam_step(&mut params, &grads, &mut moments, &opt, step)?;
                state.window_loss += value.loss;
                state.window_count += 1;
            }
            state.step = step;
            if step % options.eval_interval == 0 || step == phase_end {
                log(step, &params, &mut state)?;
            }
            if options.checkpoint_interval > 0 && step % options.checkpoint_interval == 0 {
                if let Some(dir) = &options.checkpoint_dir {
                    let path = dir.join(format!("step-{step:07}.ckpt"));
                    save_checkpoint(&snapshot(&params, &moments, &state), &path)?;
                    saved.push(path);
                }
            }
        }
        phase_start = phase_end;
    }
    Ok(PretrainOutcome {
        checkpoint: snapshot(&params, &moments, &state),
        metrics,
        saved,
    })
}

/// A sentence with one label string per word.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledSentence {
    pub words: Vec<String>,
    pub labels: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TaskData {
    pub sentences: Vec<LabeledSentence>,
    /// Dependency trees that could not be encoded because they are not
    /// projective.
    pub skipped_nonprojective: usize,
}

/// Extract the label layer of a task from annotated sentences. For
/// dependency parsing the trees are encoded as bracket labels.
pub fn labeled_sentences(sentences: &[AnnotatedSentence], kind: TaskKind) -> Result<TaskData> {
    let mut out = TaskData::default();
    for (i, s) in sentences.iter().enumerate() {
        let missing = |layer: &str| Error::Corpus(format!("sentence {} has no {layer} annotation", i + 1));
        let labels = match kind {
            TaskKind::Upos => s.upos.clone().ok_or_else(|| missing("UPOS"))?,
            TaskKind::Fpos => s.fpos.clone().ok_or_else(|| missing("XPOS"))?,
            TaskKind::Ner => s.ner.clone().ok_or_else(|| missing("NER"))?,
            TaskKind::DepBracket => {
                let heads = s.heads.clone().ok_or_else(|| missing("head"))?;
                let deprels = s.deprels.clone().ok_or_else(|| missing("deprel"))?;
                match encode_tree(&DepTree::new(heads, deprels)?) {
                    Ok(labels) => labels.iter().map(ToString::to_string).collect(),
                    Err(Error::NonProjective) => {
                        out.skipped_nonprojective += 1;
                        continue;
                    }
                    Err(e) => return Err(e),
                }
            }
        };
        out.sentences.push(LabeledSentence {
            words: s.words.clone(),
            labels,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FinetuneOptions {
    pub epochs: usize,
    pub batch_size: usize,
    /// Stop after this many epochs without dev improvement.
    pub patience: usize,
    pub seed: u64,
}

impl Default for FinetuneOptions {
    fn default() -> Self {
        FinetuneOptions {
            epochs: 10,
            batch_size: 16,
            patience: 3,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub step: u64,
    pub lr: f64,
    /// Mean per-batch summed loss.
    pub train_loss: f64,
    pub dev_accuracy: f64,
}

#[derive(Clone, Debug)]
pub struct FinetuneOutcome {
    /// Parameters of the best dev epoch.
    pub checkpoint: ModelCheckpoint,
    pub history: Vec<EpochRecord>,
    pub best_epoch: usize,
}

struct Best {
    accuracy: f64,
    epoch: usize,
    step: u64,
}

struct Encoded {
    ids: Vec<u32>,
    word_start: Vec<bool>,
    /// Position of each word's first piece, `None` if truncated away.
    positions: Vec<Option<usize>>,
}

fn encode_words(vocab: &Vocab, words: &[String], max_len: usize) -> Encoded {
    let mut seq = encode_sentence(vocab, words, true);
    if seq.ids.len() > max_len {
        seq.ids.truncate(max_len - 1);
        seq.word_start.truncate(max_len - 1);
        seq.ids.push(SEP);
        seq.word_start.push(false);
    }
    let mut positions: Vec<Option<usize>> = seq.word_positions().into_iter().map(Some).collect();
    positions.resize(words.len(), None);
    Encoded {
        ids: seq.ids,
        word_start: seq.word_start,
        positions,
    }
}

fn pad_batch(items: &[&Encoded]) -> EncoderInput {
    let len = items.iter().map(|e| e.ids.len()).max().unwrap_or(0);
    let mut ids = Vec::with_capacity(items.len() * len);
    for e in items {
        ids.extend_from_slice(&e.ids);
        ids.resize(ids.len() + len - e.ids.len(), PAD);
    }
    let attention = ids.iter().map(|&t| t != PAD).collect();
    EncoderInput {
        batch: items.len(),
        seq_len: len,
        ids,
        attention,
    }
}

fn predict_ids(
    config: &ModelConfig,
    params: &Params<f32>,
    vocab: &Vocab,
    sentences: &[Vec<String>],
    batch_size: usize,
) -> Result<Vec<Vec<usize>>> {
    let n_labels = params
        .classifier
        .as_ref()
        .ok_or_else(|| Error::Config("model has no classifier head".into()))?
        .out_dim;
    let encoded: Vec<Encoded> = sentences
        .iter()
        .map(|w| encode_words(vocab, w, config.max_positions))
        .collect();
    let mut out = Vec::with_capacity(sentences.len());
    for chunk in encoded.chunks(batch_size.max(1)) {
        let refs: Vec<&Encoded> = chunk.iter().collect();
        let input = pad_batch(&refs);
        let hidden = forward(config, params, &input, Head::None)?.hidden;
        let logits = classifier_logits(params, &hidden)?;
        for (b, e) in chunk.iter().enumerate() {
            out.push(
                e.positions
                    .iter()
                    .map(|p| match p {
                        Some(p) => {
                            let row = &logits[(b * input.seq_len + p) * n_labels..][..n_labels];
                            argmax(row)
                        }
                        None => 0,
                    })
                    .collect(),
            );
        }
    }
    Ok(out)
}

fn argmax(row: &[f32]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

fn token_accuracy(pred: &[Vec<usize>], gold: &[Vec<usize>]) -> f64 {
    let (mut correct, mut total) = (0usize, 0usize);
    for (p, g) in pred.iter().zip(gold) {
        correct += p.iter().zip(g).filter(|(a, b)| a == b).count();
        total += g.len();
    }
    if total == 0 {
        0.0
    } else {
        correct as f64 / total as f64
    }
}

/// Fine-tune every weight of a pre-trained encoder plus a fresh softmax
/// classifier. Only the first piece of each word is supervised. Training
/// stops early once dev token accuracy has not improved for `patience`
/// epochs; the best epoch's parameters are returned.
#[allow(clippy::too_many_arguments)]
pub fn finetune(
    pretrained: &ModelCheckpoint,
    vocab: &Vocab,
    train: &[LabeledSentence],
    dev: &[LabeledSentence],
    labels: &LabelSet,
    optimizer: &OptimizerConfig,
    options: &FinetuneOptions,
) -> Result<FinetuneOutcome> {
    pretrained.check_vocab(vocab)?;
    if train.is_empty() || dev.is_empty() {
        return Err(Error::Corpus("fine-tuning needs non-empty train and dev sets".into()));
    }
    if options.epochs == 0 || options.batch_size == 0 || options.patience == 0 {
        return Err(Error::Config("epochs, batch_size and patience must be positive".into()));
    }
    let unknown: BTreeSet<&String> = train
        .iter()
        .chain(dev)
        .flat_map(|s| &s.labels)
        .filter(|l| labels.id(l).is_none())
        .collect();
    if !unknown.is_empty() {
        return Err(Error::UnknownLabels(unknown.into_iter().cloned().collect()));
    }
    for (i, s) in train.iter().chain(dev).enumerate() {
        if s.words.len() != s.labels.len() {
            return Err(Error::Corpus(format!(
                "sentence {} has {} words but {} labels",
                i + 1,
                s.words.len(),
                s.labels.len()
            )));
        }
    }
    let config = pretrained.config.clone();
    let label_ids = |s: &LabeledSentence| -> Vec<usize> {
        s.labels
            .iter()
            .map(|l| labels.id(l).expect("labels checked above"))
            .collect()
    };
    let train_enc: Vec<(Encoded, Vec<u32>)> = train
        .iter()
        .map(|s| {
            let e = encode_words(vocab, &s.words, config.max_positions);
            let mut per_pos = vec![0u32; e.ids.len()];
            for (p, l) in e.positions.iter().zip(label_ids(s)) {
                if let Some(p) = p {
                    per_pos[*p] = l as u32;
                }
            }
            (e, per_pos)
        })
        .collect();
    let dev_words: Vec<Vec<String>> = dev.iter().map(|s| s.words.clone()).collect();
    let dev_gold: Vec<Vec<usize>> = dev.iter().map(label_ids).collect();

    let batches_per_epoch = train.len().div_ceil(options.batch_size) as u64;
    let opt = OptimizerConfig {
        total_steps: batches_per_epoch * options.epochs as u64,
        ..optimizer.clone()
    };
    opt.validate()?;
    let mut params = pretrained.params.clone();
    params.attach_classifier(labels.len(), seed::mix(options.seed, &[labels.len() as u64]));
    let mut moments = AdamState::new(&params);
    let mut step = 0u64;
    let mut history = Vec::new();
    let mut best: Option<(Best, Params<f32>, AdamState<f32>)> = None;
    let mut since_best = 0;

    for epoch in 1..=options.epochs {
        let mut order: Vec<usize> = (0..train.len()).collect();
        order.shuffle(&mut seed::rng(options.seed, &[seed::TAG_ORDER, epoch as u64]));
        let mut loss_sum = 0.0;
        for chunk in order.chunks(options.batch_size) {
            step += 1;
            let items: Vec<&Encoded> = chunk.iter().map(|&i| &train_enc[i].0).collect();
            let input = pad_batch(&items);
            let mut lab = vec![0u32; input.positions()];
            let mut starts = vec![false; input.positions()];
            for (b, &i) in chunk.iter().enumerate() {
                let (e, per_pos) = &train_enc[i];
                let off = b * input.seq_len;
                lab[off..off + per_pos.len()].copy_from_slice(per_pos);
                starts[off..off + e.word_start.len()].copy_from_slice(&e.word_start);
            }
            let (value, grads) = loss_and_gradients(
                &config,
                &params,
                &input,
                Objective::Classify {
                    labels: &lab,
                    word_start: &starts,
                },
                Some(seed::mix(options.seed, &[seed::TAG_DROPOUT, step])),
            )?;
            adam_step(&mut params, &grads, &mut moments, &opt, step)?;
            loss_sum += value.loss;
        }
        let pred = predict_ids(&config, &params, vocab, &dev_words, options.batch_size)?;
        let acc = token_accuracy(&pred, &dev_gold);
        history.push(EpochRecord {
            epoch,
            step,
            lr: opt.learning_rate * lr_multiplier(&opt, step),
            train_loss: loss_sum / batches_per_epoch as f64,
            dev_accuracy: acc,
        });
        if best.as_ref().is_none_or(|b| acc > b.0.accuracy) {
            best = Some((
                Best {
                    accuracy: acc,
                    epoch,
                    step,
                },
                params.clone(),
                moments.clone(),
            ));
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= options.patience {
                break;
            }
        }
    }
    let (
        Best {
            epoch: best_epoch,
            step: best_step,
            ..
        },
        params,
        moments,
    ) = best.expect("at least one epoch ran");
    Ok(FinetuneOutcome {
        checkpoint: ModelCheckpoint {
            config,
            labels: Some(labels.clone()),
            vocab_fingerprint: pretrained.vocab_fingerprint,
            optimizer: opt,
            state: TrainingState {
                step: best_step,
                seed: options.seed,
                ..Default::default()
            },
            params,
            moments: Some(moments),
        },
        history,
        best_epoch,
    })
}

/// Label strings for many sentences.
pub fn predict_many(ckpt: &ModelCheckpoint, vocab: &Vocab, sentences: &[Vec<String>]) -> Result<Vec<Vec<String>>> {
    let labels = ckpt
        .labels
        .as_ref()
        .ok_or_else(|| Error::Config("checkpoint has not been fine-tuned (no label set)".into()))?;
    ckpt.check_vocab(vocab)?;
    let ids = predict_ids(&ckpt.config, &ckpt.params, vocab, sentences, 32)?;
    Ok(ids
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|i| labels.label(i).expect("classifier matches label set").to_string())
                .collect()
        })
        .collect())
}

/// One label per word: argmax of the classifier at the word's first piece.
/// Words cut off by the position limit receive the first label.
pub fn predict_labels(ckpt: &ModelCheckpoint, vocab: &Vocab, words: &[String]) -> Result<Vec<String>> {
    Ok(predict_many(ckpt, vocab, &[words.to_vec()])?.remove(0))
}
