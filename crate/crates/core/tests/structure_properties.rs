//! Tree codec, metric and significance-test invariants.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use seqbert::eval::{bio_to_spans, las_uas, pos_accuracy, span_f1, spans_to_bio, Scores, Span};
use seqbert::stats::{paired_ttest, shuffle_test_counts, Metric, PairedSample, SentenceCounts};
use seqbert::treecodec::{decode_labels, encode_tree, random_projective_tree, BracketLabel, DepTree, Incoming};

const RELS: [&str; 4] = ["nsubj", "obj", "det", "punct"];

fn tree(n: usize, s: u64) -> DepTree {
    random_projective_tree(n, &RELS, &mut ChaCha8Rng::seed_from_u64(s)).unwrap()
}

fn label() -> impl Strategy<Value = BracketLabel> {
    (0u8..3, 0usize..4, 0usize..4, 0usize..4).prop_map(|(inc, l, r, d)| BracketLabel {
        incoming: [Incoming::FromLeft, Incoming::FromRight, Incoming::Root][inc as usize],
        n_left_deps: l,
        n_right_deps: r,
        deprel: RELS[d].to_string(),
    })
}

fn tags(n: usize) -> impl Strategy<Value = Vec<String>> {
    proptest::collection::vec("(O|B-PER|I-PER|B-LOC|I-LOC)", n)
}

fn scores_of(s: &Scores) -> Vec<f64> {
    match *s {
        Scores::Accuracy { accuracy } => vec![accuracy],
        Scores::Spans { precision, recall, f1 } => vec![precision, recall, f1],
        Scores::Attachment { las, uas } => vec![las, uas],
    }
}

proptest! {
    #[test]
    fn encode_decode_round_trip(n in 1usize..60, s in any::<u64>()) {
        let t = tree(n, s);
        let labels = encode_tree(&t).unwrap();
        prop_assert_eq!(labels.len(), n);
        let arcs: usize = labels.iter().map(|l| l.n_left_deps + l.n_right_deps).sum();
        let roots = labels.iter().filter(|l| l.incoming == Incoming::Root).count();
        prop_assert_eq!(arcs + roots, n);
        for l in &labels {
            prop_assert_eq!(&l.to_string().parse::<BracketLabel>().unwrap(), l);
        }
        let (back, report) = decode_labels(&labels).unwrap();
        prop_assert!(report.is_clean());
        prop_assert_eq!(back, t);
    }

    #[test]
    fn decoding_is_total(labels in proptest::collection::vec(label(), 1..40)) {
        let (t, _) = decode_labels(&labels).unwrap();
        prop_assert_eq!(t.len(), labels.len());
        prop_assert!(t.validate().is_ok());
        prop_assert_eq!(t.heads.iter().filter(|&&h| h == 0).count(), 1);
    }

    #[test]
    fn metric_invariants(
        n_sent in 1usize..8,
        s in any::<u64>(),
        g in tags(30),
        p in tags(30),
        cut in proptest::collection::vec(1usize..6, 8),
    ) {
        // chop the tag vectors into sentences
        let mut gold = Vec::new();
        let mut pred = Vec::new();
        let mut at = 0;
        for &len in cut.iter().take(n_sent) {
            gold.push(g[at..at + len].to_vec());
            pred.push(p[at..at + len].to_vec());
            at += len;
        }
        let f = scores_of(&span_f1(&gold, &pred).unwrap().scores);
        prop_assert!(f[2] <= f[0].max(f[1]) + 1e-12);
        prop_assert_eq!(scores_of(&span_f1(&gold, &gold).unwrap().scores), vec![1.0, 1.0, 1.0]);

        let trees_g: Vec<DepTree> = (0..n_sent).map(|i| tree(cut[i], s ^ i as u64)).collect();
        let trees_p: Vec<DepTree> = (0..n_sent).map(|i| tree(cut[i], s.wrapping_add(7 + i as u64))).collect();
        let att = scores_of(&las_uas(&trees_g, &trees_p).unwrap().scores);
        prop_assert!(att[0] <= att[1]);

        // sentence order does not matter
        let rev = |v: &Vec<Vec<String>>| v.iter().rev().cloned().collect::<Vec<_>>();
        let close = |a: Vec<f64>, b: Vec<f64>| a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-12);
        prop_assert!(close(f.clone(), scores_of(&span_f1(&rev(&gold), &rev(&pred)).unwrap().scores)));
        prop_assert!(close(
            scores_of(&pos_accuracy(&gold, &pred).unwrap().scores),
            scores_of(&pos_accuracy(&rev(&gold), &rev(&pred)).unwrap().scores),
        ));
        let rg: Vec<DepTree> = trees_g.iter().rev().cloned().collect();
        let rp: Vec<DepTree> = trees_p.iter().rev().cloned().collect();
        prop_assert!(close(att, scores_of(&las_uas(&rg, &rp).unwrap().scores)));
    }

    #[test]
    fn spans_bio_round_trip(starts in proptest::collection::vec((0usize..3, 1usize..4, 0usize..2), 0..6)) {
        // lay out non-overlapping spans left to right with gaps
        let mut spans = std::collections::BTreeSet::new();
        let mut at = 0;
        for (gap, len, kind) in starts {
            let start = at + gap;
            spans.insert(Span::new(["PER", "LOC"][kind], start, start + len - 1));
            at = start + len;
        }
        let bio = spans_to_bio(&spans, at + 2);
        prop_assert_eq!(bio_to_spans(&bio), spans);
    }

    #[test]
    fn shuffle_test_is_symmetric_and_deterministic(
        counts in proptest::collection::vec((0u64..10, 0u64..10), 2..30),
        s in any::<u64>(),
    ) {
        let a: Vec<SentenceCounts> = counts.iter().map(|&(c, _)| SentenceCounts { correct: c, pred: 10, gold: 10 }).collect();
        let b: Vec<SentenceCounts> = counts.iter().map(|&(_, c)| SentenceCounts { correct: c, pred: 10, gold: 10 }).collect();
        let ab = shuffle_test_counts(&a, &b, Metric::Accuracy, 200, s).unwrap();
        let ba = shuffle_test_counts(&b, &a, Metric::Accuracy, 200, s).unwrap();
        prop_assert_eq!(ab, shuffle_test_counts(&a, &b, Metric::Accuracy, 200, s).unwrap());
        prop_assert_eq!(ab.p_value, ba.p_value);
        prop_assert_eq!(ab.p_value, (ab.n_at_least_as_extreme + 1) as f64 / 201.0);
        prop_assert!(ab.p_value > 0.0 && ab.p_value <= 1.0);
    }

    #[test]
    fn ttest_is_antisymmetric(a in proptest::collection::vec(0.0f64..1.0, 2..20), b in proptest::collection::vec(0.0f64..1.0, 20)) {
        let b = b[..a.len()].to_vec();
        let fwd = PairedSample::new(a.clone(), b.clone()).unwrap();
        if let Ok(t) = paired_ttest(&fwd) {
            let back = paired_ttest(&fwd.swapped()).unwrap();
            prop_assert!((t.t + back.t).abs() < 1e-9 * t.t.abs().max(1.0));
            prop_assert!((t.p - back.p).abs() < 1e-12);
            prop_assert_eq!(t.df, a.len() - 1);
        }
    }
}

#[test]
fn shuffle_p_grows_as_the_observed_gap_shrinks() {
    // same shuffled distribution (same seed and per-sentence totals); B
    // moves toward A one correct token at a time
    let a: Vec<SentenceCounts> = (0..40)
        .map(|_| SentenceCounts {
            correct: 8,
            pred: 10,
            gold: 10,
        })
        .collect();
    let mut last = 0.0;
    for k in 0..=40 {
        let b: Vec<SentenceCounts> = (0..40)
            .map(|i| SentenceCounts {
                correct: if i < k { 8 } else { 6 },
                pred: 10,
                gold: 10,
            })
            .collect();
        let p = shuffle_test_counts(&a, &b, Metric::Accuracy, 2000, 3).unwrap().p_value;
        assert!(p >= last, "k={k}: p {p} < {last}");
        last = p;
    }
    assert_eq!(last, 1.0);
}

#[test]
fn perfect_versus_wrong_reaches_the_floor() {
    let a: Vec<SentenceCounts> = (0..50)
        .map(|_| SentenceCounts {
            correct: 10,
            pred: 10,
            gold: 10,
        })
        .collect();
    let b: Vec<SentenceCounts> = (0..50)
        .map(|_| SentenceCounts {
            correct: 0,
            pred: 10,
            gold: 10,
        })
        .collect();
    let r = shuffle_test_counts(&a, &b, Metric::Accuracy, 10_000, 9).unwrap();
    assert_eq!(r.n_at_least_as_extreme, 0);
    assert_eq!(r.p_value, 1.0 / 10_001.0);
}

#[test]
fn degenerate_ttest_is_an_error() {
    let s = PairedSample::new(vec![0.5, 0.7, 0.9], vec![0.4, 0.6, 0.8]).unwrap();
    assert!(paired_ttest(&s).is_err());
}
