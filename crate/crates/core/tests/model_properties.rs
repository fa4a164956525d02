mod common;

use proptest::prelude::*;
use seqbert::model::{classifier_logits, forward, EncoderInput, Head, ModelConfig};

fn softmax_rows(logits: &[f64], width: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(logits.len());
    for row in logits.chunks(width) {
        let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = row.iter().map(|v| (v - m).exp()).collect();
        let z: f64 = e.iter().sum();
        out.extend(e.iter().map(|v| v / z));
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn attention_rows_are_distributions(
        lens in proptest::collection::vec(1usize..=8, 1..4),
        s in any::<u64>(),
    ) {
        let cfg = common::tiny_config();
        let params = common::perturbed_params(&cfg, Some(4), s);
        let rows: Vec<Vec<u32>> = lens
            .iter()
            .enumerate()
            .map(|(r, &len)| (0..8).map(|i| if i < len { 5 + ((i + r) as u32 * 3) % 18 } else { 0 }).collect())
            .collect();
        let input = EncoderInput::from_rows(&rows).unwrap();
        let out = forward(&cfg, &params, &input, Head::Classifier).unwrap();
        let seq = input.seq_len;
        for layer in &out.attentions {
            for (k, row) in layer.chunks(seq).enumerate() {
                let b = k / (cfg.n_heads * seq);
                prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                for (j, w) in row.iter().enumerate() {
                    if !input.attention[b * seq + j] {
                        prop_assert_eq!(*w, 0.0);
                    }
                }
            }
        }
        let probs = softmax_rows(&classifier_logits(&params, &out.hidden).unwrap(), 4);
        for row in probs.chunks(4) {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-6);
        }
    }
}

#[test]
fn attention_ignores_padding_content() {
    let cfg = ModelConfig {
        dropout: 0.0,
        ..common::tiny_config()
    };
    let params = common::perturbed_params(&cfg, None, 2);
    let a = EncoderInput::new(1, 6, vec![2, 7, 8, 3, 0, 0], vec![true, true, true, true, false, false]).unwrap();
    let b = EncoderInput::new(
        1,
        6,
        vec![2, 7, 8, 3, 11, 19],
        vec![true, true, true, true, false, false],
    )
    .unwrap();
    let ha = forward(&cfg, &params, &a, Head::None).unwrap().hidden;
    let hb = forward(&cfg, &params, &b, Head::None).unwrap().hidden;
    assert_eq!(ha[..4 * cfg.hidden], hb[..4 * cfg.hidden]);
}
