//! Helpers shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use seqbert::model::{init_model, loss_and_gradients, objective_loss, EncoderInput, ModelConfig, Objective, Params};
use seqbert::seed;

pub fn tiny_config() -> ModelConfig {
    ModelConfig {
        n_layers: 2,
        hidden: 16,
        n_heads: 2,
        ffn_size: 64,
        vocab_size: 23,
        max_positions: 8,
        dropout: 0.0,
        layer_norm_eps: 1e-12,
    }
}

/// Initialized parameters with extra uniform noise, so attention and
/// layer norms are away from their symmetric starting point.
pub fn perturbed_params(config: &ModelConfig, labels: Option<usize>, s: u64) -> Params<f64> {
    let mut p = init_model::<f64>(config, s).unwrap();
    if let Some(n) = labels {
        p.attach_classifier(n, s);
    }
    let mut rng = seed::rng(s, &[99]);
    for t in p.tensors_mut() {
        for v in t {
            *v += rng.gen_range(-0.3..0.3);
        }
    }
    p
}

/// Two rows of eight tokens, the second padded.
pub fn tiny_input() -> EncoderInput {
    EncoderInput::from_rows(&[vec![2, 7, 12, 5, 22, 9, 14, 3], vec![2, 6, 11, 19, 3, 0, 0, 0]]).unwrap()
}

/// Gradient magnitudes below `GRADIENT_FLOOR · max(1, |loss|)` are treated
/// as zero when forming a relative error. Central differences carry
/// round-off noise of order `ε·|loss|/h`, and some gradients are exactly
/// zero (softmax ignores the per-row shift added by the attention key bias).
pub const GRADIENT_FLOOR: f64 = 1e-5;

/// Per tensor: `max |analytic - numeric| / max(max |analytic|, max |numeric|, floor)`
/// with central differences of step `h`. Returns `(name, relative error,
/// gradient scale)`.
pub fn gradient_errors(
    config: &ModelConfig,
    params: &Params<f64>,
    input: &EncoderInput,
    objective: Objective<'_>,
    dropout_seed: Option<u64>,
    h: f64,
) -> Vec<(String, f64, f64)> {
    let (value, analytic) = loss_and_gradients(config, params, input, objective, dropout_seed).unwrap();
    let loss = |p: &Params<f64>| match dropout_seed {
        None => objective_loss(config, p, input, objective).unwrap().loss,
        Some(_) => {
            loss_and_gradients(config, p, input, objective, dropout_seed)
                .unwrap()
                .0
                .loss
        }
    };
    let floor = GRADIENT_FLOOR * value.loss.abs().max(1.0);
    let names: Vec<String> = params.tensor_infos().into_iter().map(|i| i.name).collect();
    let analytic_t: Vec<Vec<f64>> = analytic.tensors().iter().map(|t| t.to_vec()).collect();
    let mut work = params.clone();
    let mut out = Vec::new();
    for (k, name) in names.into_iter().enumerate() {
        let len = analytic_t[k].len();
        let mut numeric = Vec::with_capacity(len);
        for i in 0..len {
            let orig = work.tensors()[k][i];
            work.tensors_mut()[k][i] = orig + h;
            let plus = loss(&work);
            work.tensors_mut()[k][i] = orig - h;
            let minus = loss(&work);
            work.tensors_mut()[k][i] = orig;
            numeric.push((plus - minus) / (2.0 * h));
        }
        let diff = analytic_t[k]
            .iter()
            .zip(&numeric)
            .map(|(a, n)| (a - n).abs())
            .fold(0.0, f64::max);
        let scale = analytic_t[k]
            .iter()
            .chain(&numeric)
            .map(|v| v.abs())
            .fold(0.0, f64::max);
        out.push((name, diff / scale.max(floor), scale));
    }
    out
}

const MASC: [&str; 8] = ["gato", "can", "libro", "home", "neno", "río", "monte", "barco"];
const FEM: [&str; 8] = ["casa", "vaca", "nena", "praia", "cidade", "mesa", "lúa", "porta"];
const VERBS: [&str; 6] = ["ve", "come", "leva", "busca", "quere", "atopa"];
const ADJ_STEMS: [&str; 6] = ["branc", "pequen", "nov", "vell", "bonit", "alt"];

fn noun_phrase<R: Rng>(rng: &mut R, out: &mut Vec<String>, with_adj: bool) {
    let fem = rng.gen_bool(0.5);
    let noun = if fem {
        FEM[rng.gen_range(0..FEM.len())]
    } else {
        MASC[rng.gen_range(0..MASC.len())]
    };
    out.push(if fem { "a" } else { "o" }.to_string());
    out.push(noun.to_string());
    if with_adj {
        let stem = ADJ_STEMS[rng.gen_range(0..ADJ_STEMS.len())];
        out.push(format!("{stem}{}", if fem { "a" } else { "o" }));
    }
}

/// One templated sentence: determiners and adjective endings agree in
/// gender with their noun, so masked words are partly predictable.
pub fn patterned_sentence<R: Rng>(rng: &mut R) -> Vec<String> {
    let mut words = Vec::new();
    let adj = rng.gen_bool(0.3);
    noun_phrase(rng, &mut words, adj);
    words.push(VERBS[rng.gen_range(0..VERBS.len())].to_string());
    let adj = rng.gen_bool(0.7);
    noun_phrase(rng, &mut words, adj);
    words.push(".".to_string());
    words
}

/// Synthetic raw corpus of about `n_tokens` tokens: documents of six
/// sentences, one per line, separated by blank lines.
pub fn patterned_corpus(n_tokens: usize, s: u64) -> String {
    let mut rng = seed::rng(s, &[0x636f_7270]);
    let mut text = String::new();
    let mut count = 0;
    let mut in_doc = 0;
    while count < n_tokens {
        let words = patterned_sentence(&mut rng);
        count += words.len();
        text.push_str(&words.join(" "));
        text.push('\n');
        in_doc += 1;
        if in_doc == 6 {
            text.push('\n');
            in_doc = 0;
        }
    }
    text
}
