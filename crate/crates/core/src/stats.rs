//! Significance tests for comparing two systems on the same corpus.
//!
//! * [`paired_ttest`]: two-sided paired Student t-test over per-sentence
//!   scores.
//! * [`stratified_shuffle_test`]: randomized comparator that swaps whole
//!   sentence outputs between the systems and recomputes the corpus metric.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{bio_to_spans, prf};
use crate::seed;
use crate::treecodec::DepTree;

pub const DEFAULT_TRIALS: usize = 10_000;

#[derive(Clone, Debug, PartialEq)]
pub struct PairedSample {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl PairedSample {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::Misaligned(format!(
                "{} scores for system A vs {} for system B",
                a.len(),
                b.len()
            )));
        }
        if a.len() < 2 {
            return Err(Error::Empty("a paired sample needs at least 2 pairs".into()));
        }
        Ok(PairedSample { a, b })
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn swapped(&self) -> Self {
        PairedSample {
            a: self.b.clone(),
            b: self.a.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub t: f64,
    pub df: usize,
    pub p: f64,
    pub mean_diff: f64,
}

pub fn paired_ttest(sample: &PairedSample) -> Result<TTestResult> {
    let n = sample.len();
    let d: Vec<f64> = sample.a.iter().zip(&sample.b).map(|(a, b)| a - b).collect();
    let mean = d.iter().sum::<f64>() / n as f64;
    let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    if sd <= f64::EPSILON * mean.abs().max(1.0) {
        return Err(Error::DegenerateSample { mean_diff: mean });
    }
    let t = mean / (sd / (n as f64).sqrt());
    let df = n - 1;
    Ok(TTestResult {
        t,
        df,
        p: student_t_two_sided(t, df as f64),
        mean_diff: mean,
    })
}

/// Two-sided tail probability `P(|T| >= |t|)` of Student's t.
pub fn student_t_two_sided(t: f64, df: f64) -> f64 {
    if !t.is_finite() {
        return 0.0;
    }
    regularized_incomplete_beta(df / (df + t * t), df / 2.0, 0.5)
}

/// Natural log of the gamma function (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    let t = x + 7.5;
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 500;
    const EPS: f64 = 1e-15;
    const TINY: f64 = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn regularized_incomplete_beta(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Las,
    Uas,
    Accuracy,
    #[serde(rename = "spanf1")]
    SpanF1,
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "las" => Ok(Metric::Las),
            "uas" => Ok(Metric::Uas),
            "accuracy" | "acc" => Ok(Metric::Accuracy),
            "spanf1" | "f1" => Ok(Metric::SpanF1),
            other => Err(Error::InvalidArgument(format!("unknown metric {other:?}"))),
        }
    }
}

/// Per-sentence sufficient statistics for a corpus metric. For accuracy,
/// LAS and UAS, `pred == gold ==` token count; for span F1 they are span
/// counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceCounts {
    pub correct: u64,
    pub pred: u64,
    pub gold: u64,
}

impl std::ops::AddAssign for SentenceCounts {
    fn add_assign(&mut self, o: Self) {
        self.correct += o.correct;
        self.pred += o.pred;
        self.gold += o.gold;
    }
}

impl std::ops::SubAssign for SentenceCounts {
    fn sub_assign(&mut self, o: Self) {
        self.correct -= o.correct;
        self.pred -= o.pred;
        self.gold -= o.gold;
    }
}

impl Metric {
    pub fn corpus_score(self, c: SentenceCounts) -> f64 {
        match self {
            Metric::SpanF1 => prf(c.correct as usize, c.pred as usize, c.gold as usize).2,
            _ => {
                if c.gold == 0 {
                    0.0
                } else {
                    c.correct as f64 / c.gold as f64
                }
            }
        }
    }
}

/// System output that can be scored sentence by sentence against gold.
pub trait Scorable {
    fn sentence_counts(gold: &Self, pred: &Self, metric: Metric) -> Result<SentenceCounts>;
}

impl Scorable for DepTree {
    fn sentence_counts(gold: &Self, pred: &Self, metric: Metric) -> Result<SentenceCounts> {
        if gold.len() != pred.len() {
            return Err(Error::Misaligned(format!(
                "tree of {} words vs {}",
                gold.len(),
                pred.len()
            )));
        }
        let correct = (0..gold.len())
            .filter(|&i| match metric {
                Metric::Uas => gold.heads[i] == pred.heads[i],
                Metric::Las => gold.heads[i] == pred.heads[i] && gold.deprels[i] == pred.deprels[i],
                Metric::Accuracy => gold.deprels[i] == pred.deprels[i],
                Metric::SpanF1 => false,
            })
            .count() as u64;
        if metric == Metric::SpanF1 {
            return Err(Error::InvalidArgument("span F1 is undefined for trees".into()));
        }
        let n = gold.len() as u64;
        Ok(SentenceCounts {
            correct,
            pred: n,
            gold: n,
        })
    }
}

impl Scorable for Vec<String> {
    fn sentence_counts(gold: &Self, pred: &Self, metric: Metric) -> Result<SentenceCounts> {
        if gold.len() != pred.len() {
            return Err(Error::Misaligned(format!(
                "sentence of {} tags vs {}",
                gold.len(),
                pred.len()
            )));
        }
        match metric {
            Metric::Accuracy => {
                let n = gold.len() as u64;
                let correct = gold.iter().zip(pred).filter(|(g, p)| g == p).count() as u64;
                Ok(SentenceCounts {
                    correct,
                    pred: n,
                    gold: n,
                })
            }
            Metric::SpanF1 => {
                let g = bio_to_spans(gold);
                let p = bio_to_spans(pred);
                Ok(SentenceCounts {
                    correct: g.intersection(&p).count() as u64,
                    pred: p.len() as u64,
                    gold: g.len() as u64,
                })
            }
            Metric::Las | Metric::Uas => Err(Error::InvalidArgument("attachment scores need dependency trees".into())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShuffleTestResult {
    pub metric: Metric,
    pub observed_diff: f64,
    pub n_trials: usize,
    pub n_at_least_as_extreme: usize,
    pub p_value: f64,
    pub seed: u64,
}

pub fn sentence_counts<S: Scorable>(gold: &[S], pred: &[S], metric: Metric) -> Result<Vec<SentenceCounts>> {
    if gold.len() != pred.len() {
        return Err(Error::Misaligned(format!(
            "{} gold sentences vs {} predicted",
            gold.len(),
            pred.len()
        )));
    }
    gold.iter()
        .zip(pred)
        .enumerate()
        .map(|(i, (g, p))| {
            S::sentence_counts(g, p, metric).map_err(|e| Error::Misaligned(format!("sentence {i}: {e}")))
        })
        .collect()
}

/// Stratified shuffling test on raw system outputs.
pub fn stratified_shuffle_test<S: Scorable>(
    gold: &[S],
    out_a: &[S],
    out_b: &[S],
    metric: Metric,
    n_trials: usize,
    seed: u64,
) -> Result<ShuffleTestResult> {
    let a = sentence_counts(gold, out_a, metric)?;
    let b = sentence_counts(gold, out_b, metric)?;
    shuffle_test_counts(&a, &b, metric, n_trials, seed)
}

/// Stratified shuffling test on per-sentence sufficient statistics.
///
/// Each trial swaps the two systems' outputs for every sentence with
/// probability ½ and counts trials whose absolute metric difference is at
/// least the observed one. `p = (count + 1) / (trials + 1)`. Trial `k`
/// draws from a stream derived from `(seed, k)`.
pub fn shuffle_test_counts(
    a: &[SentenceCounts],
    b: &[SentenceCounts],
    metric: Metric,
    n_trials: usize,
    seed: u64,
) -> Result<ShuffleTestResult> {
    if a.len() != b.len() {
        return Err(Error::Misaligned(format!(
            "{} sentences for system A vs {} for system B",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::Empty("no sentences to compare".into()));
    }
    if n_trials < 100 {
        return Err(Error::InvalidArgument(format!(
            "at least 100 trials are required, got {n_trials}"
        )));
    }
    let mut total_a = SentenceCounts::default();
    let mut total_b = SentenceCounts::default();
    for (x, y) in a.iter().zip(b) {
        total_a += *x;
        total_b += *y;
    }
    let observed = (metric.corpus_score(total_a) - metric.corpus_score(total_b)).abs();
    let threshold = observed - 1e-12 * observed.max(1.0);

    let mut extreme = 0;
    for trial in 0..n_trials {
        let mut rng = seed::rng(seed, &[seed::TAG_SHUFFLE, trial as u64]);
        let mut ta = total_a;
        let mut tb = total_b;
        for (x, y) in a.iter().zip(b) {
            if rng.gen::<bool>() {
                ta -= *x;
                ta += *y;
                tb -= *y;
                tb += *x;
            }
        }
        let diff = (metric.corpus_score(ta) - metric.corpus_score(tb)).abs();
        if diff >= threshold {
            extreme += 1;
        }
    }
    Ok(ShuffleTestResult {
        metric,
        observed_diff: observed,
        n_trials,
        n_at_least_as_extreme: extreme,
        p_value: (extreme + 1) as f64 / (n_trials + 1) as f64,
        seed,
    })
}
