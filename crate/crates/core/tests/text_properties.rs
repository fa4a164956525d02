//! Corpus, tokenizer and masking invariants.

use std::collections::BTreeMap;
use std::path::Path;

use proptest::prelude::*;
use seqbert::corpus::{
    conllu_string, parse_conllu, split_corpus, AnnotatedSentence, Document, DocumentSet, SplitSpec, SplitUnit,
};
use seqbert::mlm::{mask_batch, pack_sequences, MaskingPolicy};
use seqbert::tokenizer::{
    decode, encode_sentence, encode_word, train_vocab_from_counts, Vocab, MASK, NUM_SPECIALS, PAD, UNK,
};

fn docs(n: usize, files: usize) -> DocumentSet {
    DocumentSet {
        documents: (0..n)
            .map(|i| Document {
                id: format!("f{}#{i}", i % files),
                source: format!("f{}", i * files / n.max(1)),
                text: format!("doc {i}"),
                first_line: i + 1,
                last_line: i + 1,
            })
            .collect(),
    }
}

fn word() -> impl Strategy<Value = String> {
    "[a-zñé]{1,8}"
}

fn sentence() -> impl Strategy<Value = AnnotatedSentence> {
    (1usize..8).prop_flat_map(|n| {
        (
            proptest::collection::vec("[A-Za-z]{1,6}", n),
            proptest::collection::vec("(NOUN|VERB|DET|ADJ)", n),
            proptest::collection::vec("[a-z]{1,4}", n),
            proptest::collection::vec(proptest::bool::ANY, n),
        )
            .prop_map(|(words, upos, deprels, with_fpos)| {
                let n = words.len();
                let mut s = AnnotatedSentence::new(words);
                s.upos = Some(upos);
                s.fpos = with_fpos[0].then(|| vec!["x".to_string(); n]);
                s.heads = Some((0..n).map(|i| if i == 0 { 0 } else { 1 }).collect());
                s.deprels = Some(deprels);
                s
            })
    })
}

proptest! {
    #[test]
    fn split_is_an_ordered_partition(n in 2usize..60, frac in 0.05f64..0.95, by_file in proptest::bool::ANY) {
        let set = docs(n, 4);
        let spec = SplitSpec {
            train_fraction: frac,
            unit: if by_file { SplitUnit::File } else { SplitUnit::Document },
        };
        let (train, dev) = split_corpus(&set, &spec).unwrap();
        prop_assert!(!dev.is_empty());
        let joined: Vec<&Document> = train.iter().chain(dev.iter()).collect();
        prop_assert_eq!(joined, set.iter().collect::<Vec<_>>());
    }

    #[test]
    fn conllu_round_trips(sentences in proptest::collection::vec(sentence(), 1..5)) {
        let text = conllu_string(&sentences);
        let back = parse_conllu(&text, Path::new("p")).unwrap();
        prop_assert_eq!(back.len(), sentences.len());
        for (a, b) in back.iter().zip(&sentences) {
            prop_assert_eq!(&a.words, &b.words);
            prop_assert_eq!(&a.upos, &b.upos);
            prop_assert_eq!(&a.fpos, &b.fpos);
            prop_assert_eq!(&a.heads, &b.heads);
            prop_assert_eq!(&a.deprels, &b.deprels);
        }
        prop_assert_eq!(conllu_string(&back), text);
    }

    #[test]
    fn pieces_concatenate_to_the_word(words in proptest::collection::vec(word(), 1..30), probe in word()) {
        let mut counts = BTreeMap::new();
        for w in &words {
            *counts.entry(w.clone()).or_insert(0u64) += 3;
        }
        let vocab = train_vocab_from_counts(&counts, 80, 1).unwrap();
        prop_assert_eq!(vocab.len(), 80);
        for w in words.iter().chain(std::iter::once(&probe)) {
            let ids = encode_word(&vocab, w);
            if ids == [UNK] {
                continue;
            }
            let joined: String = ids
                .iter()
                .map(|&i| vocab.piece(i).unwrap().trim_start_matches("##"))
                .collect();
            prop_assert_eq!(&joined, w);
        }
        // context independence and decode ∘ encode
        let seq = encode_sentence(&vocab, &words, false);
        let per_word: Vec<u32> = words.iter().flat_map(|w| encode_word(&vocab, w)).collect();
        prop_assert_eq!(&seq.ids, &per_word);
        if !seq.ids.contains(&UNK) {
            prop_assert_eq!(decode(&vocab, &seq.ids).unwrap(), words.join(" "));
        }
    }

    #[test]
    fn vocab_training_is_deterministic(words in proptest::collection::vec(word(), 1..20)) {
        let counts: BTreeMap<String, u64> = words.iter().enumerate().map(|(i, w)| (w.clone(), 1 + i as u64 % 4)).collect();
        let a = train_vocab_from_counts(&counts, 70, 1).unwrap();
        let b = train_vocab_from_counts(&counts, 70, 1).unwrap();
        prop_assert_eq!(a.pieces(), b.pieces());
        prop_assert_eq!(a.fingerprint(), b.fingerprint());
    }

    #[test]
    fn masking_invariants(
        streams in proptest::collection::vec(proptest::collection::vec(5u32..40, 0..50), 1..6),
        seq_len in 8usize..24,
        s in any::<u64>(),
    ) {
        let vocab = Vocab::with_specials((0..35).map(|i| format!("w{i}"))).unwrap();
        let rows = pack_sequences(&streams, seq_len, true).unwrap();
        prop_assume!(!rows.is_empty());
        let policy = MaskingPolicy::default();
        let a = mask_batch(&rows, &vocab, &policy, s).unwrap();
        let b = mask_batch(&rows, &vocab, &policy, s).unwrap();
        prop_assert_eq!(&a, &b);
        for i in 0..a.input_ids.len() {
            let target = a.target_ids[i];
            prop_assert_eq!(target, rows[i / seq_len][i % seq_len]);
            if target == PAD {
                prop_assert!(!a.attention_mask[i] && !a.loss_mask[i]);
            }
            if (target as usize) < NUM_SPECIALS {
                prop_assert!(!a.loss_mask[i]);
            }
            if !a.loss_mask[i] {
                prop_assert_eq!(a.input_ids[i], target);
            } else if a.input_ids[i] != MASK {
                prop_assert!(a.input_ids[i] as usize >= NUM_SPECIALS && (a.input_ids[i] as usize) < vocab.len());
            }
        }
    }
}

#[test]
fn different_seeds_select_differently() {
    let vocab = Vocab::with_specials((0..100).map(|i| format!("w{i}"))).unwrap();
    let stream: Vec<u32> = (0..2000).map(|i| 5 + i % 100).collect();
    let rows = pack_sequences(&[stream], 64, false).unwrap();
    let a = mask_batch(&rows, &vocab, &MaskingPolicy::default(), 1).unwrap();
    let b = mask_batch(&rows, &vocab, &MaskingPolicy::default(), 2).unwrap();
    assert_ne!(a.loss_mask, b.loss_mask);
}
