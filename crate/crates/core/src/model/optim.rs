use serde::{Deserialize, Serialize};

use super::params::Params;
use super::scalar::Scalar;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    #[default]
    LinearDecay,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerConfig {
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub adam_eps: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub total_steps: u64,
    pub warmup_steps: u64,
    pub schedule: Schedule,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            learning_rate: 1e-4,
            weight_decay: 0.01,
            adam_eps: 1e-8,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            total_steps: 10_000,
            warmup_steps: 0,
            schedule: Schedule::LinearDecay,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.learning_rate > 0.0 && self.adam_eps > 0.0) {
            return fail("learning_rate and adam_eps must be positive");
        }
        if self.weight_decay.is_nan() || self.weight_decay < 0.0 {
            return fail("weight_decay must be non-negative");
        }
        if !((0.0..1.0).contains(&self.adam_beta1) && (0.0..1.0).contains(&self.adam_beta2)) {
            return fail("Adam betas must lie in [0, 1)");
        }
        if self.total_steps == 0 {
            return fail("total_steps must be positive");
        }
        if self.warmup_steps >= self.total_steps {
            return fail("warmup_steps must be below total_steps");
        }
        Ok(())
    }
}

/// Learning-rate multiplier after `step` updates: linear warmup over
/// `warmup_steps`, then linear decay reaching zero at `total_steps`.
pub fn lr_multiplier(config: &OptimizerConfig, step: u64) -> f64 {
    let (s, w, t) = (step as f64, config.warmup_steps as f64, config.total_steps as f64);
    if step < config.warmup_steps {
        s / w
    } else {
        ((t - s) / (t - w)).max(0.0)
    }
}

/// First and second moment estimates, one buffer per parameter tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState<T> {
    pub m: Vec<Vec<T>>,
    pub v: Vec<Vec<T>>,
}

impl<T: Scalar> AdamState<T> {
    pub fn new(params: &Params<T>) -> Self {
        let zeros: Vec<Vec<T>> = params.tensors().iter().map(|t| vec![T::zero(); t.len()]).collect();
        AdamState {
            m: zeros.clone(),
            v: zeros,
        }
    }
}

/// One bias-corrected Adam update (`step` counts from 1) with decoupled
/// weight decay on matrices and embeddings. Returns the learning rate used.
pub fn adam_step<T: Scalar>(
    params: &mut Params<T>,
    grads: &Params<T>,
    state: &mut AdamState<T>,
    config: &OptimizerConfig,
    step: u64,
) -> Result<f64> {
    if step == 0 {
        return Err(Error::InvalidArgument("Adam steps count from 1".into()));
    }
    let infos = params.tensor_infos();
    let grad_tensors = grads.tensors();
    if grad_tensors.len() != infos.len() || state.m.len() != infos.len() {
        return Err(Error::Shape(
            "gradients or optimizer state do not match the parameters".into(),
        ));
    }
    let lr = config.learning_rate * lr_multiplier(config, step);
    let (b1, b2) = (config.adam_beta1, config.adam_beta2);
    let c1 = T::from_f64(1.0 / (1.0 - b1.powf(step as f64)));
    let c2 = T::from_f64(1.0 / (1.0 - b2.powf(step as f64)));
    let (tb1, tb2) = (T::from_f64(b1), T::from_f64(b2));
    let (ob1, ob2) = (T::from_f64(1.0 - b1), T::from_f64(1.0 - b2));
    let eps = T::from_f64(config.adam_eps);
    let tlr = T::from_f64(lr);
    let wd = T::from_f64(config.weight_decay);
    for (k, p) in params.tensors_mut().into_iter().enumerate() {
        let g = grad_tensors[k];
        let (m, v) = (&mut state.m[k], &mut state.v[k]);
        if g.len() != p.len() || m.len() != p.len() {
            return Err(Error::Shape(format!("tensor {} has mismatched buffers", infos[k].name)));
        }
        let decay = infos[k].decay && config.weight_decay > 0.0;
        for i in 0..p.len() {
            m[i] = tb1 * m[i] + ob1 * g[i];
            v[i] = tb2 * v[i] + ob2 * g[i] * g[i];
            let mut update = (m[i] * c1) / ((v[i] * c2).sqrt() + eps);
            if decay {
                update += wd * p[i];
            }
            p[i] -= tlr * update;
        }
    }
    Ok(lr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{init_model, ModelConfig};

    fn tiny() -> (Params<f64>, ModelConfig) {
        let cfg = ModelConfig {
            n_layers: 1,
            hidden: 4,
            n_heads: 1,
            ffn_size: 4,
            vocab_size: 8,
            max_positions: 4,
            ..Default::default()
        };
        (init_model(&cfg, 0).unwrap(), cfg)
    }

    #[test]
    fn schedule() {
        let c = OptimizerConfig {
            total_steps: 100,
            ..Default::default()
        };
        assert_eq!(lr_multiplier(&c, 0), 1.0);
        assert_eq!(lr_multiplier(&c, 50), 0.5);
        assert_eq!(lr_multiplier(&c, 100), 0.0);
        assert_eq!(lr_multiplier(&c, 150), 0.0);
        let w = OptimizerConfig {
            total_steps: 100,
            warmup_steps: 10,
            ..Default::default()
        };
        assert_eq!(lr_multiplier(&w, 5), 0.5);
        assert_eq!(lr_multiplier(&w, 10), 1.0);
        assert_eq!(lr_multiplier(&w, 55), 0.5);
    }

    #[test]
    fn scalar_first_step() {
        let (mut p, _) = tiny();
        let cfg = OptimizerConfig {
            weight_decay: 0.0,
            total_steps: 1_000_000,
            ..Default::default()
        };
        let mut g = p.zeros_like();
        g.mlm_bias[0] = 1.0;
        let before = p.mlm_bias[0];
        let mut st = AdamState::new(&p);
        let lr = adam_step(&mut p, &g, &mut st, &cfg, 1).unwrap();
        let expected = -lr / (1.0 + 1e-8);
        assert!((p.mlm_bias[0] - before - expected).abs() < 1e-18);
        assert!((p.mlm_bias[0] - before + 1e-4).abs() < 1e-9);
        assert_eq!(p.mlm_bias[1], 0.0);
    }

    #[test]
    fn zero_gradient_without_decay_is_noop() {
        let (mut p, _) = tiny();
        let orig = p.clone();
        let g = p.zeros_like();
        let mut st = AdamState::new(&p);
        let cfg = OptimizerConfig {
            weight_decay: 0.0,
            ..Default::default()
        };
        adam_step(&mut p, &g, &mut st, &cfg, 1).unwrap();
        assert_eq!(p, orig);
    }

    #[test]
    fn decay_skips_biases_and_norms() {
        let (mut p, _) = tiny();
        p.mlm_bias.fill(1.0);
        p.layers[0].query.bias.fill(1.0);
        let orig = p.clone();
        let g = p.zeros_like();
        let mut st = AdamState::new(&p);
        adam_step(&mut p, &g, &mut st, &OptimizerConfig::default(), 1).unwrap();
        assert_eq!(p.mlm_bias, orig.mlm_bias);
        assert_eq!(p.layers[0].query.bias, orig.layers[0].query.bias);
        assert_eq!(p.layers[0].attn_norm, orig.layers[0].attn_norm);
        assert_ne!(p.token_embedding, orig.token_embedding);
    }

    #[test]
    fn final_step_leaves_params_unchanged() {
        let (mut p, _) = tiny();
        let orig = p.clone();
        let mut g = p.zeros_like();
        g.token_embedding.fill(0.5);
        let mut st = AdamState::new(&p);
        let cfg = OptimizerConfig {
            total_steps: 3,
            ..Default::default()
        };
        assert_eq!(adam_step(&mut p, &g, &mut st, &cfg, 3).unwrap(), 0.0);
        assert_eq!(p, orig);
    }
}
