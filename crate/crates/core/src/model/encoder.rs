use rand::Rng;

use super::params::{LayerNorm, Params};
use super::scalar::{gemm, linear, linear_backward, Scalar, View};
use super::ModelConfig;
use crate::error::{Error, Result};
use crate::mlm::MaskedBatch;
use crate::seed;
use crate::tokenizer::PAD;

/// A batch of token rows. `attention[i]` is false for padding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncoderInput {
    pub batch: usize,
    pub seq_len: usize,
    pub ids: Vec<u32>,
    pub attention: Vec<bool>,
}

impl EncoderInput {
    pub fn new(batch: usize, seq_len: usize, ids: Vec<u32>, attention: Vec<bool>) -> Result<Self> {
        if ids.len() != batch * seq_len || attention.len() != ids.len() {
            return Err(Error::Shape(format!(
                "{} ids and {} attention flags for a {batch}x{seq_len} batch",
                ids.len(),
                attention.len()
            )));
        }
        Ok(EncoderInput {
            batch,
            seq_len,
            ids,
            attention,
        })
    }

    /// Equal-length rows; `[PAD]` positions are masked out of attention.
    pub fn from_rows(rows: &[Vec<u32>]) -> Result<Self> {
        let seq_len = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != seq_len) {
            return Err(Error::Shape("rows of a batch must share one length".into()));
        }
        let ids: Vec<u32> = rows.concat();
        let attention = ids.iter().map(|&t| t != PAD).collect();
        Self::new(rows.len(), seq_len, ids, attention)
    }

    pub fn from_masked(batch: &MaskedBatch) -> Self {
        EncoderInput {
            batch: batch.batch,
            seq_len: batch.seq_len,
            ids: batch.input_ids.clone(),
            attention: batch.attention_mask.clone(),
        }
    }

    pub fn positions(&self) -> usize {
        self.batch * self.seq_len
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Head {
    None,
    Mlm,
    Classifier,
}

#[derive(Clone, Debug)]
pub struct ForwardOutput<T> {
    /// Final hidden states `[batch·seq, hidden]`.
    pub hidden: Vec<T>,
    /// Attention probabilities per layer, `[batch, heads, seq, seq]`.
    pub attentions: Vec<Vec<T>>,
    /// `[batch·seq, n_outputs]`, empty for [`Head::None`].
    pub logits: Vec<T>,
    pub n_outputs: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossValue {
    /// Mean loss for MLM, summed loss for classification.
    pub loss: f64,
    /// `exp` of the mean per-position cross-entropy.
    pub perplexity: f64,
    /// Number of scored positions.
    pub count: usize,
    /// Summed cross-entropy.
    pub total: f64,
}

impl LossValue {
    fn from_sum(sum: f64, count: usize, mean: bool) -> Self {
        let per = if count == 0 { 0.0 } else { sum / count as f64 };
        LossValue {
            loss: if mean { per } else { sum },
            perplexity: per.exp(),
            count,
            total: sum,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub enum Objective<'a> {
    /// Mean cross-entropy over positions with `loss_mask` set.
    Mlm { targets: &'a [u32], loss_mask: &'a [bool] },
    /// Summed cross-entropy over positions with `word_start` set.
    Classify { labels: &'a [u32], word_start: &'a [bool] },
}

const GELU_C: f64 = 0.797_884_560_802_865_4; // sqrt(2/pi)
const GELU_A: f64 = 0.044_715;

/// GELU, tanh approximation.
pub fn gelu<T: Scalar>(x: T) -> T {
    let half = T::from_f64(0.5);
    let inner = T::from_f64(GELU_C) * (x + T::from_f64(GELU_A) * x * x * x);
    half * x * (T::one() + inner.tanh())
}

fn gelu_grad<T: Scalar>(x: T) -> T {
    let half = T::from_f64(0.5);
    let a = T::from_f64(GELU_A);
    let c = T::from_f64(GELU_C);
    let t = (c * (x + a * x * x * x)).tanh();
    half * (T::one() + t) + half * x * (T::one() - t * t) * c * (T::one() + T::from_f64(3.0) * a * x * x)
}

struct LnCache<T> {
    xhat: Vec<T>,
    rstd: Vec<T>,
}

fn layer_norm<T: Scalar>(x: &[T], ln: &LayerNorm<T>, eps: T) -> (Vec<T>, LnCache<T>) {
    let h = ln.gamma.len();
    let rows = x.len() / h;
    let n = T::from_f64(h as f64);
    let mut y = vec![T::zero(); x.len()];
    let mut xhat = vec![T::zero(); x.len()];
    let mut rstd = Vec::with_capacity(rows);
    for r in 0..rows {
        let xs = &x[r * h..(r + 1) * h];
        let mean = xs.iter().copied().sum::<T>() / n;
        let var = xs.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / n;
        let rs = T::one() / (var + eps).sqrt();
        rstd.push(rs);
        for j in 0..h {
            let xh = (xs[j] - mean) * rs;
            xhat[r * h + j] = xh;
            y[r * h + j] = ln.gamma[j] * xh + ln.beta[j];
        }
    }
    (y, LnCache { xhat, rstd })
}

/// Returns the gradient with respect to the layer-norm input.
fn layer_norm_backward<T: Scalar>(dy: &[T], cache: &LnCache<T>, gamma: &[T], grad: &mut LayerNorm<T>) -> Vec<T> {
    let h = gamma.len();
    let n = T::from_f64(h as f64);
    let mut dx = vec![T::zero(); dy.len()];
    let mut dxhat = vec![T::zero(); h];
    for (r, &rs) in cache.rstd.iter().enumerate() {
        let dys = &dy[r * h..(r + 1) * h];
        let xh = &cache.xhat[r * h..(r + 1) * h];
        let mut mean_d = T::zero();
        let mut mean_dx = T::zero();
        for j in 0..h {
            grad.gamma[j] += dys[j] * xh[j];
            grad.beta[j] += dys[j];
            dxhat[j] = dys[j] * gamma[j];
            mean_d += dxhat[j];
            mean_dx += dxhat[j] * xh[j];
        }
        mean_d /= n;
        mean_dx /= n;
        for j in 0..h {
            dx[r * h + j] = rs * (dxhat[j] - mean_d - xh[j] * mean_dx);
        }
    }
    dx
}

/// Row-wise softmax in place; rows whose entries are all `-inf` become zero.
fn softmax_rows<T: Scalar>(x: &mut [T], width: usize) {
    for row in x.chunks_exact_mut(width) {
        let max = row.iter().copied().fold(T::neg_infinity(), T::max);
        if max == T::neg_infinity() {
            row.fill(T::zero());
            continue;
        }
        let mut total = T::zero();
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            total += *v;
        }
        for v in row.iter_mut() {
            *v /= total;
        }
    }
}

fn dropout_mask<T: Scalar, R: Rng>(rng: &mut R, n: usize, p: f64) -> Vec<T> {
    let keep = T::from_f64(1.0 / (1.0 - p));
    (0..n)
        .map(|_| if rng.gen::<f64>() < p { T::zero() } else { keep })
        .collect()
}

fn apply_mask<T: Scalar>(x: &mut [T], mask: &Option<Vec<T>>) {
    if let Some(m) = mask {
        for (v, &k) in x.iter_mut().zip(m) {
            *v *= k;
        }
    }
}

fn check_finite<T: Scalar>(x: &[T], layer: usize) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { layer })
    }
}

struct LayerCache<T> {
    x: Vec<T>,
    q: Vec<T>,
    k: Vec<T>,
    v: Vec<T>,
    probs: Vec<T>,
    ctx: Vec<T>,
    attn_drop: Option<Vec<T>>,
    ln1: LnCache<T>,
    y1: Vec<T>,
    f1: Vec<T>,
    g: Vec<T>,
    ffn_drop: Option<Vec<T>>,
    ln2: LnCache<T>,
}

struct Trace<T> {
    emb_drop: Option<Vec<T>>,
    layers: Vec<LayerCache<T>>,
    hidden: Vec<T>,
}

fn validate_input<T: Scalar>(config: &ModelConfig, params: &Params<T>, input: &EncoderInput) -> Result<()> {
    if params.hidden != config.hidden || params.layers.len() != config.n_layers {
        return Err(Error::Shape("parameters do not match the model configuration".into()));
    }
    if input.ids.len() != input.positions() || input.attention.len() != input.positions() {
        return Err(Error::Shape(
            "input ids and attention mask must cover batch x seq_len".into(),
        ));
    }
    if input.seq_len > params.max_positions {
        return Err(Error::Shape(format!(
            "sequence length {} exceeds max_positions {}",
            input.seq_len, params.max_positions
        )));
    }
    if let Some(&id) = input.ids.iter().find(|&&id| id as usize >= params.vocab_size) {
        return Err(Error::TokenOutOfRange {
            id,
            size: params.vocab_size,
        });
    }
    Ok(())
}

fn run<T: Scalar>(
    config: &ModelConfig,
    params: &Params<T>,
    input: &EncoderInput,
    dropout_seed: Option<u64>,
) -> Result<Trace<T>> {
    validate_input(config, params, input)?;
    let (b, s, h) = (input.batch, input.seq_len, config.hidden);
    let nh = config.n_heads;
    let d = config.head_dim();
    let n = b * s;
    let eps = T::from_f64(config.layer_norm_eps);
    let scale = T::from_f64(1.0 / (d as f64).sqrt());
    let p = config.dropout;
    let mut rng = dropout_seed
        .filter(|_| p > 0.0)
        .map(|sd| seed::rng(sd, &[seed::TAG_DROPOUT]));
    let mut mask = |len: usize| rng.as_mut().map(|r| dropout_mask::<T, _>(r, len, p));

    let mut x = vec![T::zero(); n * h];
    for (i, &id) in input.ids.iter().enumerate() {
        let t = i % s;
        let tok = &params.token_embedding[id as usize * h..(id as usize + 1) * h];
        let pos = &params.position_embedding[t * h..(t + 1) * h];
        for j in 0..h {
            x[i * h + j] = tok[j] + pos[j];
        }
    }
    let emb_drop = mask(n * h);
    apply_mask(&mut x, &emb_drop);

    let mut layers = Vec::with_capacity(params.layers.len());
    for (l, lp) in params.layers.iter().enumerate() {
        let q = linear(&x, n, &lp.query.weight, &lp.query.bias, h);
        let k = linear(&x, n, &lp.key.weight, &lp.key.bias, h);
        let v = linear(&x, n, &lp.value.weight, &lp.value.bias, h);
        let mut probs = vec![T::zero(); b * nh * s * s];
        let mut ctx = vec![T::zero(); n * h];
        for bi in 0..b {
            for hi in 0..nh {
                let off = bi * s * h + hi * d;
                let pb = &mut probs[(bi * nh + hi) * s * s..(bi * nh + hi + 1) * s * s];
                gemm(
                    scale,
                    &q[off..],
                    View::block(s, d, h),
                    &k[off..],
                    View::block(s, d, h).t(),
                    T::zero(),
                    pb,
                    View::row_major(s, s),
                );
                for row in pb.chunks_exact_mut(s) {
                    for (c, v) in row.iter_mut().enumerate() {
                        if !input.attention[bi * s + c] {
                            *v = T::neg_infinity();
                        }
                    }
                }
                softmax_rows(pb, s);
                gemm(
                    T::one(),
                    pb,
                    View::row_major(s, s),
                    &v[off..],
                    View::block(s, d, h),
                    T::zero(),
                    &mut ctx[off..],
                    View::block(s, d, h),
                );
            }
        }
        let mut a = linear(&ctx, n, &lp.attn_out.weight, &lp.attn_out.bias, h);
        let attn_drop = mask(n * h);
        apply_mask(&mut a, &attn_drop);
        for (ai, &xi) in a.iter_mut().zip(&x) {
            *ai += xi;
        }
        let (y1, ln1) = layer_norm(&a, &lp.attn_norm, eps);
        let f1 = linear(&y1, n, &lp.ffn_in.weight, &lp.ffn_in.bias, config.ffn_size);
        let g: Vec<T> = f1.iter().map(|&z| gelu(z)).collect();
        let mut f2 = linear(&g, n, &lp.ffn_out.weight, &lp.ffn_out.bias, h);
        let ffn_drop = mask(n * h);
        apply_mask(&mut f2, &ffn_drop);
        for (fi, &yi) in f2.iter_mut().zip(&y1) {
            *fi += yi;
        }
        let (y2, ln2) = layer_norm(&f2, &lp.ffn_norm, eps);
        check_finite(&y2, l)?;
        layers.push(LayerCache {
            x: std::mem::replace(&mut x, y2),
            q,
            k,
            v,
            probs,
            ctx,
            attn_drop,
            ln1,
            y1,
            f1,
            g,
            ffn_drop,
            ln2,
        });
    }
    Ok(Trace {
        emb_drop,
        layers,
        hidden: x,
    })
}

/// Masked-LM logits (`[rows.len(), vocab]`) for the selected positions,
/// using the token embeddings as output projection.
pub fn mlm_logits<T: Scalar>(params: &Params<T>, hidden: &[T], rows: &[usize]) -> Vec<T> {
    let h = params.hidden;
    let mut sel = Vec::with_capacity(rows.len() * h);
    for &r in rows {
        sel.extend_from_slice(&hidden[r * h..(r + 1) * h]);
    }
    linear(
        &sel,
        rows.len(),
        &params.token_embedding,
        &params.mlm_bias,
        params.vocab_size,
    )
}

pub fn classifier_logits<T: Scalar>(params: &Params<T>, hidden: &[T]) -> Result<Vec<T>> {
    let c = params
        .classifier
        .as_ref()
        .ok_or_else(|| Error::Config("model has no classifier head".into()))?;
    Ok(linear(
        hidden,
        hidden.len() / params.hidden,
        &c.weight,
        &c.bias,
        c.out_dim,
    ))
}

/// Evaluation-mode forward pass (no dropout).
pub fn forward<T: Scalar>(
    config: &ModelConfig,
    params: &Params<T>,
    input: &EncoderInput,
    head: Head,
) -> Result<ForwardOutput<T>> {
    let trace = run(config, params, input, None)?;
    let (logits, n_outputs) = match head {
        Head::None => (Vec::new(), 0),
        Head::Mlm => {
            let rows: Vec<usize> = (0..input.positions()).collect();
            (mlm_logits(params, &trace.hidden, &rows), params.vocab_size)
        }
        Head::Classifier => {
            let lg = classifier_logits(params, &trace.hidden)?;
            let k = lg.len() / input.positions().max(1);
            (lg, k)
        }
    };
    Ok(ForwardOutput {
        attentions: trace.layers.into_iter().map(|l| l.probs).collect(),
        hidden: trace.hidden,
        logits,
        n_outputs,
    })
}

/// Cross-entropy of each listed row; returns the summed loss and, if
/// requested, `softmax - onehot` for every listed row.
fn cross_entropy<T: Scalar>(logits: &[T], width: usize, targets: &[u32], want_grad: bool) -> (f64, Vec<T>) {
    let mut total = 0.0;
    let mut grad = if want_grad { logits.to_vec() } else { Vec::new() };
    for (r, &t) in targets.iter().enumerate() {
        let row = &logits[r * width..(r + 1) * width];
        let max = row.iter().copied().fold(T::neg_infinity(), T::max).as_f64();
        let lse = row.iter().map(|v| (v.as_f64() - max).exp()).sum::<f64>().ln() + max;
        total += lse - row[t as usize].as_f64();
        if want_grad {
            let g = &mut grad[r * width..(r + 1) * width];
            for v in g.iter_mut() {
                *v = T::from_f64((v.as_f64() - lse).exp());
            }
            g[t as usize] -= T::one();
        }
    }
    (total, grad)
}

/// Mean masked-LM cross-entropy over positions with `loss_mask` set.
/// `logits` is `[positions, vocab]`.
pub fn mlm_loss<T: Scalar>(logits: &[T], vocab_size: usize, targets: &[u32], loss_mask: &[bool]) -> Result<LossValue> {
    if logits.len() != targets.len() * vocab_size || loss_mask.len() != targets.len() {
        return Err(Error::Shape("logits, targets and loss mask disagree".into()));
    }
    let (rows, tgt) = selected_targets(targets, loss_mask, vocab_size)?;
    if rows.is_empty() {
        return Err(Error::EmptyLossMask);
    }
    let mut sel = Vec::with_capacity(rows.len() * vocab_size);
    for &r in &rows {
        sel.extend_from_slice(&logits[r * vocab_size..(r + 1) * vocab_size]);
    }
    let (sum, _) = cross_entropy(&sel, vocab_size, &tgt, false);
    Ok(LossValue::from_sum(sum, rows.len(), true))
}

/// Summed cross-entropy over positions with `word_start_mask` set; other
/// positions are ignored. `logits` is `[positions, n_labels]`.
pub fn classify_loss<T: Scalar>(
    logits: &[T],
    n_labels: usize,
    labels: &[u32],
    word_start_mask: &[bool],
) -> Result<LossValue> {
    if logits.len() != labels.len() * n_labels || word_start_mask.len() != labels.len() {
        return Err(Error::Shape("logits, labels and word-start mask disagree".into()));
    }
    let (rows, tgt) = selected_labels(labels, word_start_mask, n_labels)?;
    let mut sel = Vec::with_capacity(rows.len() * n_labels);
    for &r in &rows {
        sel.extend_from_slice(&logits[r * n_labels..(r + 1) * n_labels]);
    }
    let (sum, _) = cross_entropy(&sel, n_labels, &tgt, false);
    Ok(LossValue::from_sum(sum, rows.len(), false))
}

fn selected_targets(targets: &[u32], mask: &[bool], vocab: usize) -> Result<(Vec<usize>, Vec<u32>)> {
    let mut rows = Vec::new();
    let mut tgt = Vec::new();
    for (i, (&t, &m)) in targets.iter().zip(mask).enumerate() {
        if m {
            if t as usize >= vocab {
                return Err(Error::TokenOutOfRange { id: t, size: vocab });
            }
            rows.push(i);
            tgt.push(t);
        }
    }
    Ok((rows, tgt))
}

fn selected_labels(labels: &[u32], mask: &[bool], n_labels: usize) -> Result<(Vec<usize>, Vec<u32>)> {
    let mut rows = Vec::new();
    let mut tgt = Vec::new();
    for (i, (&t, &m)) in labels.iter().zip(mask).enumerate() {
        if m {
            if t as usize >= n_labels {
                return Err(Error::LabelOutOfRange {
                    id: t as usize,
                    size: n_labels,
                });
            }
            rows.push(i);
            tgt.push(t);
        }
    }
    Ok((rows, tgt))
}

/// Loss of the objective and (optionally) the gradient of the final
/// hidden states, with head gradients accumulated into `grads`.
fn head_loss<T: Scalar>(
    params: &Params<T>,
    hidden: &[T],
    objective: Objective<'_>,
    grads: Option<&mut Params<T>>,
) -> Result<(LossValue, Vec<T>)> {
    let h = params.hidden;
    let n = hidden.len() / h;
    let want = grads.is_some();
    let mut dh = if want {
        vec![T::zero(); hidden.len()]
    } else {
        Vec::new()
    };
    match objective {
        Objective::Mlm { targets, loss_mask } => {
            if targets.len() != n || loss_mask.len() != n {
                return Err(Error::Shape("MLM targets do not cover the batch".into()));
            }
            let (rows, tgt) = selected_targets(targets, loss_mask, params.vocab_size)?;
            if rows.is_empty() {
                return Err(Error::EmptyLossMask);
            }
            let logits = mlm_logits(params, hidden, &rows);
            let (sum, mut dlogits) = cross_entropy(&logits, params.vocab_size, &tgt, want);
            let value = LossValue::from_sum(sum, rows.len(), true);
            if let Some(g) = grads {
                let inv = T::from_f64(1.0 / rows.len() as f64);
                dlogits.iter_mut().for_each(|v| *v *= inv);
                let mut sel = Vec::with_capacity(rows.len() * h);
                for &r in &rows {
                    sel.extend_from_slice(&hidden[r * h..(r + 1) * h]);
                }
                let mut dsel = vec![T::zero(); sel.len()];
                linear_backward(
                    &dlogits,
                    &sel,
                    rows.len(),
                    &params.token_embedding,
                    &mut g.token_embedding,
                    &mut g.mlm_bias,
                    params.vocab_size,
                    &mut dsel,
                );
                for (k, &r) in rows.iter().enumerate() {
                    dh[r * h..(r + 1) * h].copy_from_slice(&dsel[k * h..(k + 1) * h]);
                }
            }
            Ok((value, dh))
        }
        Objective::Classify { labels, word_start } => {
            let c = params
                .classifier
                .as_ref()
                .ok_or_else(|| Error::Config("model has no classifier head".into()))?;
            if labels.len() != n || word_start.len() != n {
                return Err(Error::Shape("labels do not cover the batch".into()));
            }
            let (rows, tgt) = selected_labels(labels, word_start, c.out_dim)?;
            let mut sel = Vec::with_capacity(rows.len() * h);
            for &r in &rows {
                sel.extend_from_slice(&hidden[r * h..(r + 1) * h]);
            }
            let logits = linear(&sel, rows.len(), &c.weight, &c.bias, c.out_dim);
            let (sum, dlogits) = cross_entropy(&logits, c.out_dim, &tgt, want);
            let value = LossValue::from_sum(sum, rows.len(), false);
            if let Some(g) = grads {
                let gc = g.classifier.as_mut().expect("gradient buffers mirror parameters");
                let mut dsel = vec![T::zero(); sel.len()];
                linear_backward(
                    &dlogits,
                    &sel,
                    rows.len(),
                    &c.weight,
                    &mut gc.weight,
                    &mut gc.bias,
                    c.out_dim,
                    &mut dsel,
                );
                for (k, &r) in rows.iter().enumerate() {
                    dh[r * h..(r + 1) * h].copy_from_slice(&dsel[k * h..(k + 1) * h]);
                }
            }
            Ok((value, dh))
        }
    }
}

/// Loss of `objective` in evaluation mode.
pub fn objective_loss<T: Scalar>(
    config: &ModelConfig,
    params: &Params<T>,
    input: &EncoderInput,
    objective: Objective<'_>,
) -> Result<LossValue> {
    let trace = run(config, params, input, None)?;
    Ok(head_loss(params, &trace.hidden, objective, None)?.0)
}

/// Loss and exact gradients with respect to every parameter.
///
/// With `dropout_seed` set and a non-zero dropout rate, the pass runs in
/// training mode with masks drawn from that seed.
pub fn loss_and_gradients<T: Scalar>(
    config: &ModelConfig,
    params: &Params<T>,
    input: &EncoderInput,
    objective: Objective<'_>,
    dropout_seed: Option<u64>,
) -> Result<(LossValue, Params<T>)> {
    let trace = run(config, params, input, dropout_seed)?;
    let mut grads = params.zeros_like();
    let (value, mut dx) = head_loss(params, &trace.hidden, objective, Some(&mut grads))?;

    let (b, s, h) = (input.batch, input.seq_len, config.hidden);
    let nh = config.n_heads;
    let d = config.head_dim();
    let n = b * s;
    let scale = T::from_f64(1.0 / (d as f64).sqrt());

    for (l, (lc, lp)) in trace.layers.iter().zip(&params.layers).enumerate().rev() {
        let gl = &mut grads.layers[l];
        // FFN block
        let dr2 = layer_norm_backward(&dx, &lc.ln2, &lp.ffn_norm.gamma, &mut gl.ffn_norm);
        let mut dy1 = dr2.clone();
        let mut df2 = dr2;
        apply_mask(&mut df2, &lc.ffn_drop);
        let mut dg = vec![T::zero(); n * config.ffn_size];
        linear_backward(
            &df2,
            &lc.g,
            n,
            &lp.ffn_out.weight,
            &mut gl.ffn_out.weight,
            &mut gl.ffn_out.bias,
            h,
            &mut dg,
        );
        for (gv, &z) in dg.iter_mut().zip(&lc.f1) {
            *gv *= gelu_grad(z);
        }
        linear_backward(
            &dg,
            &lc.y1,
            n,
            &lp.ffn_in.weight,
            &mut gl.ffn_in.weight,
            &mut gl.ffn_in.bias,
            config.ffn_size,
            &mut dy1,
        );

        // attention block
        let dr1 = layer_norm_backward(&dy1, &lc.ln1, &lp.attn_norm.gamma, &mut gl.attn_norm);
        let mut dxl = dr1.clone();
        let mut da = dr1;
        apply_mask(&mut da, &lc.attn_drop);
        let mut dctx = vec![T::zero(); n * h];
        linear_backward(
            &da,
            &lc.ctx,
            n,
            &lp.attn_out.weight,
            &mut gl.attn_out.weight,
            &mut gl.attn_out.bias,
            h,
            &mut dctx,
        );
        let mut dq = vec![T::zero(); n * h];
        let mut dk = vec![T::zero(); n * h];
        let mut dv = vec![T::zero(); n * h];
        let mut dp = vec![T::zero(); s * s];
        for bi in 0..b {
            for hi in 0..nh {
                let off = bi * s * h + hi * d;
                let pb = &lc.probs[(bi * nh + hi) * s * s..(bi * nh + hi + 1) * s * s];
                gemm(
                    T::one(),
                    &dctx[off..],
                    View::block(s, d, h),
                    &lc.v[off..],
                    View::block(s, d, h).t(),
                    T::zero(),
                    &mut dp,
                    View::row_major(s, s),
                );
                gemm(
                    T::one(),
                    pb,
                    View::row_major(s, s).t(),
                    &dctx[off..],
                    View::block(s, d, h),
                    T::one(),
                    &mut dv[off..],
                    View::block(s, d, h),
                );
                for (drow, prow) in dp.chunks_exact_mut(s).zip(pb.chunks_exact(s)) {
                    let dot: T = drow.iter().zip(prow).map(|(&a, &p)| a * p).sum();
                    for (dv, &p) in drow.iter_mut().zip(prow) {
                        *dv = p * (*dv - dot);
                    }
                }
                gemm(
                    scale,
                    &dp,
                    View::row_major(s, s),
                    &lc.k[off..],
                    View::block(s, d, h),
                    T::one(),
                    &mut dq[off..],
                    View::block(s, d, h),
                );
                gemm(
                    scale,
                    &dp,
                    View::row_major(s, s).t(),
                    &lc.q[off..],
                    View::block(s, d, h),
                    T::one(),
                    &mut dk[off..],
                    View::block(s, d, h),
                );
            }
        }
        for (dy, lin, gw) in [
            (&dq, &lp.query, &mut gl.query),
            (&dk, &lp.key, &mut gl.key),
            (&dv, &lp.value, &mut gl.value),
        ] {
            linear_backward(dy, &lc.x, n, &lin.weight, &mut gw.weight, &mut gw.bias, h, &mut dxl);
        }
        check_finite(&dxl, l)?;
        dx = dxl;
    }

    apply_mask(&mut dx, &trace.emb_drop);
    for (i, &id) in input.ids.iter().enumerate() {
        let t = i % s;
        let row = &dx[i * h..(i + 1) * h];
        let id = id as usize;
        for (j, &g) in row.iter().enumerate() {
            grads.token_embedding[id * h + j] += g;
            grads.position_embedding[t * h + j] += g;
        }
    }
    Ok((value, grads))
}
