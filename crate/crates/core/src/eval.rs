//! Task metrics: tagging accuracy, BIO span P/R/F1 and LAS/UAS.
//!
//! Corpus-level scores are always ratios of corpus totals, never means of
//! per-sentence values. Per-sentence scores are retained for significance
//! testing.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::treecodec::DepTree;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub kind: String,
    /// Inclusive token offsets.
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(kind: impl Into<String>, start: usize, end: usize) -> Self {
        Span {
            kind: kind.into(),
            start,
            end,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scores {
    Accuracy { accuracy: f64 },
    Spans { precision: f64, recall: f64, f1: f64 },
    Attachment { las: f64, uas: f64 },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub sentences: usize,
    pub tokens: usize,
    /// Correct tokens for accuracy, correct heads for attachment.
    pub correct: usize,
    /// Correct heads and labels (attachment only).
    pub correct_labeled: usize,
    pub gold_spans: usize,
    pub pred_spans: usize,
    pub correct_spans: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub scores: Scores,
    /// Per-sentence token accuracy (tagging, NER) or UAS (parsing).
    pub per_sentence: Vec<f64>,
    /// Per-sentence LAS; empty except for parsing.
    pub per_sentence_labeled: Vec<f64>,
    pub counts: Counts,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Aligned two-column plain-text table.
    pub fn to_table(&self) -> String {
        let mut rows: Vec<(&str, String)> = match &self.scores {
            Scores::Accuracy { accuracy } => vec![("accuracy", format!("{:.4}", accuracy))],
            Scores::Spans { precision, recall, f1 } => vec![
                ("precision", format!("{precision:.4}")),
                ("recall", format!("{recall:.4}")),
                ("f1", format!("{f1:.4}")),
            ],
            Scores::Attachment { las, uas } => {
                vec![("LAS", format!("{las:.4}")), ("UAS", format!("{uas:.4}"))]
            }
        };
        rows.push(("sentences", self.counts.sentences.to_string()));
        rows.push(("tokens", self.counts.tokens.to_string()));
        if matches!(self.scores, Scores::Spans { .. }) {
            rows.push(("gold spans", self.counts.gold_spans.to_string()));
            rows.push(("pred spans", self.counts.pred_spans.to_string()));
            rows.push(("correct spans", self.counts.correct_spans.to_string()));
        }
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (k, v) in rows {
            let _ = writeln!(out, "{k:<width$}  {v:>10}");
        }
        out
    }

    /// `sentence,score[,labeled]` CSV of the per-sentence vector.
    pub fn per_sentence_csv(&self) -> String {
        let mut out = String::new();
        if self.per_sentence_labeled.is_empty() {
            out.push_str("sentence,score\n");
            for (i, s) in self.per_sentence.iter().enumerate() {
                let _ = writeln!(out, "{i},{s}");
            }
        } else {
            out.push_str("sentence,uas,las\n");
            for (i, (u, l)) in self.per_sentence.iter().zip(&self.per_sentence_labeled).enumerate() {
                let _ = writeln!(out, "{i},{u},{l}");
            }
        }
        out
    }
}

fn check_aligned<T>(gold: &[T], pred: &[T], len: impl Fn(&T) -> usize) -> Result<()> {
    if gold.is_empty() {
        return Err(Error::Empty("no sentences to evaluate".into()));
    }
    if gold.len() != pred.len() {
        return Err(Error::Misaligned(format!(
            "{} gold sentences vs {} predicted",
            gold.len(),
            pred.len()
        )));
    }
    for (i, (g, p)) in gold.iter().zip(pred).enumerate() {
        if len(g) != len(p) {
            return Err(Error::LengthMismatch {
                sentence: i,
                gold: len(g),
                pred: len(p),
            });
        }
    }
    Ok(())
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Token-level exact-match accuracy.
pub fn pos_accuracy<S: AsRef<str>>(gold: &[Vec<S>], pred: &[Vec<S>]) -> Result<EvalReport> {
    check_aligned(gold, pred, Vec::len)?;
    let mut counts = Counts {
        sentences: gold.len(),
        ..Default::default()
    };
    let mut per_sentence = Vec::with_capacity(gold.len());
    for (g, p) in gold.iter().zip(pred) {
        let correct = g.iter().zip(p).filter(|(a, b)| a.as_ref() == b.as_ref()).count();
        counts.tokens += g.len();
        counts.correct += correct;
        per_sentence.push(ratio(correct, g.len()));
    }
    if counts.tokens == 0 {
        return Err(Error::Empty("no tokens to evaluate".into()));
    }
    Ok(EvalReport {
        scores: Scores::Accuracy {
            accuracy: ratio(counts.correct, counts.tokens),
        },
        per_sentence,
        per_sentence_labeled: Vec::new(),
        counts,
    })
}

/// Extract entity spans from BIO tags. An `I-X` that does not continue an
/// open `X` span starts a new one.
pub fn bio_to_spans<S: AsRef<str>>(tags: &[S]) -> BTreeSet<Span> {
    let mut spans = BTreeSet::new();
    let mut open: Option<(String, usize)> = None;
    for (i, tag) in tags.iter().enumerate() {
        let tag = tag.as_ref();
        let (prefix, kind) = match tag.split_once('-') {
            Some((p @ ("B" | "I"), k)) => (p, k),
            _ => ("O", ""),
        };
        let continues = prefix == "I" && open.as_ref().is_some_and(|(k, _)| k == kind);
        if !continues {
            if let Some((k, s)) = open.take() {
                spans.insert(Span::new(k, s, i - 1));
            }
            if prefix != "O" {
                open = Some((kind.to_string(), i));
            }
        }
    }
    if let Some((k, s)) = open {
        spans.insert(Span::new(k, s, tags.len() - 1));
    }
    spans
}

/// Inverse of [`bio_to_spans`] for non-overlapping spans.
pub fn spans_to_bio(spans: &BTreeSet<Span>, len: usize) -> Vec<String> {
    let mut tags = vec!["O".to_string(); len];
    for s in spans {
        tags[s.start] = format!("B-{}", s.kind);
        for t in &mut tags[s.start + 1..=s.end] {
            *t = format!("I-{}", s.kind);
        }
    }
    tags
}

/// Exact-match span precision, recall and F1. Per-sentence values are
/// token accuracies, since span F1 does not decompose by sentence.
pub fn span_f1<S: AsRef<str>>(gold: &[Vec<S>], pred: &[Vec<S>]) -> Result<EvalReport> {
    check_aligned(gold, pred, Vec::len)?;
    let mut counts = Counts {
        sentences: gold.len(),
        ..Default::default()
    };
    let mut per_sentence = Vec::with_capacity(gold.len());
    for (g, p) in gold.iter().zip(pred) {
        let gs = bio_to_spans(g);
        let ps = bio_to_spans(p);
        counts.gold_spans += gs.len();
        counts.pred_spans += ps.len();
        counts.correct_spans += gs.intersection(&ps).count();
        let correct = g.iter().zip(p).filter(|(a, b)| a.as_ref() == b.as_ref()).count();
        counts.tokens += g.len();
        counts.correct += correct;
        per_sentence.push(ratio(correct, g.len()));
    }
    let (precision, recall, f1) = prf(counts.correct_spans, counts.pred_spans, counts.gold_spans);
    Ok(EvalReport {
        scores: Scores::Spans { precision, recall, f1 },
        per_sentence,
        per_sentence_labeled: Vec::new(),
        counts,
    })
}

/// Precision, recall, F1 from counts; each is 0 when its denominator is 0,
/// except that no gold and no predicted spans scores a perfect 1.
pub fn prf(correct: usize, pred: usize, gold: usize) -> (f64, f64, f64) {
    if pred == 0 && gold == 0 {
        return (1.0, 1.0, 1.0);
    }
    let p = ratio(correct, pred);
    let r = ratio(correct, gold);
    let f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
    (p, r, f)
}

/// Labeled and unlabeled attachment scores over all words, punctuation
/// included.
pub fn las_uas(gold: &[DepTree], pred: &[DepTree]) -> Result<EvalReport> {
    check_aligned(gold, pred, DepTree::len)?;
    let mut counts = Counts {
        sentences: gold.len(),
        ..Default::default()
    };
    let mut uas = Vec::with_capacity(gold.len());
    let mut las = Vec::with_capacity(gold.len());
    for (g, p) in gold.iter().zip(pred) {
        let mut head_ok = 0;
        let mut both_ok = 0;
        for i in 0..g.len() {
            if g.heads[i] == p.heads[i] {
                head_ok += 1;
                if g.deprels[i] == p.deprels[i] {
                    both_ok += 1;
                }
            }
        }
        counts.tokens += g.len();
        counts.correct += head_ok;
        counts.correct_labeled += both_ok;
        uas.push(ratio(head_ok, g.len()));
        las.push(ratio(both_ok, g.len()));
    }
    Ok(EvalReport {
        scores: Scores::Attachment {
            las: ratio(counts.correct_labeled, counts.tokens),
            uas: ratio(counts.correct, counts.tokens),
        },
        per_sentence: uas,
        per_sentence_labeled: las,
        counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tags(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn accuracy_examples() {
        let g = vec![tags("A B C D"), tags("A B C D")];
        let r = pos_accuracy(&g, &g).unwrap();
        assert_eq!(r.scores, Scores::Accuracy { accuracy: 1.0 });
        let p = vec![tags("A B C X"), tags("A X C D")];
        let r = pos_accuracy(&g, &p).unwrap();
        assert_eq!(r.scores, Scores::Accuracy { accuracy: 0.75 });
        assert_eq!(r.per_sentence, [0.75, 0.75]);
        let empty: Vec<Vec<String>> = vec![];
        assert!(matches!(pos_accuracy(&empty, &empty), Err(Error::Empty(_))));
        let short = vec![tags("A B C D"), tags("A B")];
        assert!(matches!(
            pos_accuracy(&g, &short),
            Err(Error::LengthMismatch { sentence: 1, .. })
        ));
    }

    #[test]
    fn spans_from_bio() {
        assert_eq!(
            bio_to_spans(&tags("B-PER I-PER O")),
            BTreeSet::from([Span::new("PER", 0, 1)])
        );
        assert_eq!(bio_to_spans(&tags("O I-LOC")), BTreeSet::from([Span::new("LOC", 1, 1)]));
        assert_eq!(
            bio_to_spans(&tags("B-PER B-PER")),
            BTreeSet::from([Span::new("PER", 0, 0), Span::new("PER", 1, 1)])
        );
        assert_eq!(
            bio_to_spans(&tags("B-PER I-LOC")),
            BTreeSet::from([Span::new("PER", 0, 0), Span::new("LOC", 1, 1)])
        );
    }

    #[test]
    fn span_scores() {
        let g = vec![tags("O B-PER I-PER O O")];
        let p = vec![tags("O B-PER I-PER O B-LOC")];
        let r = span_f1(&g, &p).unwrap();
        match r.scores {
            Scores::Spans { precision, recall, f1 } => {
                assert_eq!(precision, 0.5);
                assert_eq!(recall, 1.0);
                assert!((f1 - 2.0 / 3.0).abs() < 1e-15);
            }
            _ => unreachable!(),
        }
        let none = vec![tags("O O O O O")];
        assert_eq!(
            span_f1(&g, &none).unwrap().scores,
            Scores::Spans {
                precision: 0.0,
                recall: 0.0,
                f1: 0.0
            }
        );
        assert_eq!(
            span_f1(&g, &g).unwrap().scores,
            Scores::Spans {
                precision: 1.0,
                recall: 1.0,
                f1: 1.0
            }
        );
    }

    #[test]
    fn attachment_scores() {
        let g = DepTree::new(vec![0, 1], vec!["root".into(), "obj".into()]).unwrap();
        let p = DepTree::new(vec![0, 1], vec!["root".into(), "nsubj".into()]).unwrap();
        let r = las_uas(std::slice::from_ref(&g), &[p]).unwrap();
        assert_eq!(r.scores, Scores::Attachment { las: 0.5, uas: 1.0 });
        let wrong = DepTree::new(vec![2, 0], vec!["x".into(), "y".into()]).unwrap();
        assert_eq!(
            las_uas(std::slice::from_ref(&g), &[wrong]).unwrap().scores,
            Scores::Attachment { las: 0.0, uas: 0.0 }
        );
        assert_eq!(
            las_uas(std::slice::from_ref(&g), std::slice::from_ref(&g))
                .unwrap()
                .scores,
            Scores::Attachment { las: 1.0, uas: 1.0 }
        );
    }

    #[test]
    fn report_rendering() {
        let g = vec![tags("A B"), tags("C")];
        let r = pos_accuracy(&g, &g).unwrap();
        assert!(r.to_table().contains("accuracy"));
        assert!(r.to_json().contains("\"accuracy\": 1.0"));
        assert_eq!(r.per_sentence_csv(), "sentence,score\n0,1\n1,1\n");
    }
}
