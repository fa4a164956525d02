use rand::Rng;
use serde::{Deserialize, Serialize};

use super::scalar::Scalar;
use super::ModelConfig;
use crate::error::{Error, Result};
use crate::seed;

pub const INIT_STD: f64 = 0.02;

/// Dense layer `y = x·Wᵀ + b` with `weight` stored `[out, in]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Linear<T> {
    pub weight: Vec<T>,
    pub bias: Vec<T>,
    pub in_dim: usize,
    pub out_dim: usize,
}

impl<T: Scalar> Linear<T> {
    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Linear {
            weight: vec![T::zero(); in_dim * out_dim],
            bias: vec![T::zero(); out_dim],
            in_dim,
            out_dim,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LayerNorm<T> {
    pub gamma: Vec<T>,
    pub beta: Vec<T>,
}

impl<T: Scalar> LayerNorm<T> {
    pub fn identity(dim: usize) -> Self {
        LayerNorm {
            gamma: vec![T::one(); dim],
            beta: vec![T::zero(); dim],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EncoderLayer<T> {
    pub query: Linear<T>,
    pub key: Linear<T>,
    pub value: Linear<T>,
    pub attn_out: Linear<T>,
    pub attn_norm: LayerNorm<T>,
    pub ffn_in: Linear<T>,
    pub ffn_out: Linear<T>,
    pub ffn_norm: LayerNorm<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Params<T> {
    pub hidden: usize,
    pub vocab_size: usize,
    pub max_positions: usize,
    /// `[vocab, hidden]`, also the masked-LM output projection.
    pub token_embedding: Vec<T>,
    /// `[max_positions, hidden]`.
    pub position_embedding: Vec<T>,
    pub layers: Vec<EncoderLayer<T>>,
    pub mlm_bias: Vec<T>,
    /// `[labels, hidden]` softmax classifier, present after fine-tuning starts.
    pub classifier: Option<Linear<T>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorInfo {
    pub name: String,
    pub shape: Vec<usize>,
    /// Subject to weight decay (matrices yes, biases and layer norms no).
    pub decay: bool,
}

impl<T: Scalar> Params<T> {
    /// All-zero parameters except layer-norm scales, which are one.
    pub fn zeros(config: &ModelConfig) -> Self {
        let h = config.hidden;
        let layer = || EncoderLayer {
            query: Linear::zeros(h, h),
            key: Linear::zeros(h, h),
            value: Linear::zeros(h, h),
            attn_out: Linear::zeros(h, h),
            attn_norm: LayerNorm::identity(h),
            ffn_in: Linear::zeros(h, config.ffn_size),
            ffn_out: Linear::zeros(config.ffn_size, h),
            ffn_norm: LayerNorm::identity(h),
        };
        Params {
            hidden: h,
            vocab_size: config.vocab_size,
            max_positions: config.max_positions,
            token_embedding: vec![T::zero(); config.vocab_size * h],
            position_embedding: vec![T::zero(); config.max_positions * h],
            layers: (0..config.n_layers).map(|_| layer()).collect(),
            mlm_bias: vec![T::zero(); config.vocab_size],
            classifier: None,
        }
    }

    /// Tensor names, shapes and decay flags in canonical order; matches
    /// [`Params::tensors`] and [`Params::tensors_mut`].
    pub fn tensor_infos(&self) -> Vec<TensorInfo> {
        let mut out = Vec::new();
        let mut push = |name: String, shape: Vec<usize>, decay: bool| out.push(TensorInfo { name, shape, decay });
        push("embeddings.token".into(), vec![self.vocab_size, self.hidden], true);
        push(
            "embeddings.position".into(),
            vec![self.max_positions, self.hidden],
            true,
        );
        for (i, l) in self.layers.iter().enumerate() {
            for (name, lin) in layer_linears(l) {
                push(format!("layer.{i}.{name}.weight"), vec![lin.out_dim, lin.in_dim], true);
                push(format!("layer.{i}.{name}.bias"), vec![lin.out_dim], false);
                if name == "attention.output" {
                    push(format!("layer.{i}.attention.norm.gamma"), vec![self.hidden], false);
                    push(format!("layer.{i}.attention.norm.beta"), vec![self.hidden], false);
                }
            }
            push(format!("layer.{i}.ffn.norm.gamma"), vec![self.hidden], false);
            push(format!("layer.{i}.ffn.norm.beta"), vec![self.hidden], false);
        }
        push("mlm.bias".into(), vec![self.vocab_size], false);
        if let Some(c) = &self.classifier {
            push("classifier.weight".into(), vec![c.out_dim, c.in_dim], true);
            push("classifier.bias".into(), vec![c.out_dim], false);
        }
        out
    }

    pub fn tensors(&self) -> Vec<&[T]> {
        let mut out: Vec<&[T]> = vec![&self.token_embedding, &self.position_embedding];
        for l in &self.layers {
            out.extend([
                &l.query.weight[..],
                &l.query.bias,
                &l.key.weight,
                &l.key.bias,
                &l.value.weight,
                &l.value.bias,
                &l.attn_out.weight,
                &l.attn_out.bias,
                &l.attn_norm.gamma,
                &l.attn_norm.beta,
                &l.ffn_in.weight,
                &l.ffn_in.bias,
                &l.ffn_out.weight,
                &l.ffn_out.bias,
                &l.ffn_norm.gamma,
                &l.ffn_norm.beta,
            ]);
        }
        out.push(&self.mlm_bias);
        if let Some(c) = &self.classifier {
            out.push(&c.weight);
            out.push(&c.bias);
        }
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [T]> {
        let mut out: Vec<&mut [T]> = vec![&mut self.token_embedding, &mut self.position_embedding];
        for l in &mut self.layers {
            out.extend([
                &mut l.query.weight[..],
                &mut l.query.bias,
                &mut l.key.weight,
                &mut l.key.bias,
                &mut l.value.weight,
                &mut l.value.bias,
                &mut l.attn_out.weight,
                &mut l.attn_out.bias,
                &mut l.attn_norm.gamma,
                &mut l.attn_norm.beta,
                &mut l.ffn_in.weight,
                &mut l.ffn_in.bias,
                &mut l.ffn_out.weight,
                &mut l.ffn_out.bias,
                &mut l.ffn_norm.gamma,
                &mut l.ffn_norm.beta,
            ]);
        }
        out.push(&mut self.mlm_bias);
        if let Some(c) = &mut self.classifier {
            out.push(&mut c.weight);
            out.push(&mut c.bias);
        }
        out
    }

    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        for t in z.tensors_mut() {
            t.fill(T::zero());
        }
        z
    }

    pub fn n_params(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|x| x.is_finite()))
    }

    /// Replace the classifier with a freshly initialized `[n_labels, hidden]` head.
    pub fn attach_classifier(&mut self, n_labels: usize, seed: u64) {
        let mut head = Linear::zeros(self.hidden, n_labels);
        let mut rng = seed::rng(seed, &[seed::TAG_INIT, u64::MAX]);
        fill_truncated_normal(&mut head.weight, INIT_STD, &mut rng);
        self.classifier = Some(head);
    }

    /// Element-wise conversion to another precision.
    pub fn cast<U: Scalar>(&self) -> Params<U> {
        let cast_vec = |v: &[T]| v.iter().map(|x| U::from_f64(x.as_f64())).collect::<Vec<U>>();
        let cast_lin = |l: &Linear<T>| Linear {
            weight: cast_vec(&l.weight),
            bias: cast_vec(&l.bias),
            in_dim: l.in_dim,
            out_dim: l.out_dim,
        };
        let cast_ln = |l: &LayerNorm<T>| LayerNorm {
            gamma: cast_vec(&l.gamma),
            beta: cast_vec(&l.beta),
        };
        Params {
            hidden: self.hidden,
            vocab_size: self.vocab_size,
            max_positions: self.max_positions,
            token_embedding: cast_vec(&self.token_embedding),
            position_embedding: cast_vec(&self.position_embedding),
            layers: self
                .layers
                .iter()
                .map(|l| EncoderLayer {
                    query: cast_lin(&l.query),
                    key: cast_lin(&l.key),
                    value: cast_lin(&l.value),
                    attn_out: cast_lin(&l.attn_out),
                    attn_norm: cast_ln(&l.attn_norm),
                    ffn_in: cast_lin(&l.ffn_in),
                    ffn_out: cast_lin(&l.ffn_out),
                    ffn_norm: cast_ln(&l.ffn_norm),
                })
                .collect(),
            mlm_bias: cast_vec(&self.mlm_bias),
            classifier: self.classifier.as_ref().map(cast_lin),
        }
    }
}

fn layer_linears<T>(l: &EncoderLayer<T>) -> [(&'static str, &Linear<T>); 6] {
    [
        ("attention.query", &l.query),
        ("attention.key", &l.key),
        ("attention.value", &l.value),
        ("attention.output", &l.attn_out),
        ("ffn.input", &l.ffn_in),
        ("ffn.output", &l.ffn_out),
    ]
}

/// Normal(0, std) truncated at two standard deviations.
fn fill_truncated_normal<T: Scalar, R: Rng>(values: &mut [T], std: f64, rng: &mut R) {
    for v in values {
        let z = loop {
            // Box-Muller
            let u1: f64 = 1.0 - rng.gen::<f64>();
            let u2: f64 = rng.gen();
            let z = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
            if z.abs() <= 2.0 {
                break z;
            }
        };
        *v = T::from_f64(z * std);
    }
}

/// Initialize encoder parameters: weight matrices and embeddings from a
/// truncated normal (σ = 0.02), biases zero, layer-norm scale one and
/// offset zero. Each tensor draws from its own seeded stream.
pub fn init_model<T: Scalar>(config: &ModelConfig, seed: u64) -> Result<Params<T>> {
    config.validate()?;
    let mut params = Params::<T>::zeros(config);
    let infos = params.tensor_infos();
    for (k, (info, t)) in infos.iter().zip(params.tensors_mut()).enumerate() {
        if info.decay {
            let mut rng = seed::rng(seed, &[seed::TAG_INIT, k as u64]);
            fill_truncated_normal(t, INIT_STD, &mut rng);
        }
    }
    if !params.is_finite() {
        return Err(Error::Config("initialization produced non-finite values".into()));
    }
    Ok(params)
}
