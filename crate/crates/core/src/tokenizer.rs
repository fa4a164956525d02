//! Cased WordPiece vocabulary and greedy longest-match segmentation.
//!
//! Non-initial pieces of a word carry a `##` prefix. Ids 0..5 are reserved
//! for `[PAD]`, `[UNK]`, `[CLS]`, `[SEP]` and `[MASK]`, in that order.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs;
use std::path::Path;

use unicode_normalization::UnicodeNormalization;

use crate::corpus::DocumentSet;
use crate::error::{Error, Result};

pub const PAD: u32 = 0;
pub const UNK: u32 = 1;
pub const CLS: u32 = 2;
pub const SEP: u32 = 3;
pub const MASK: u32 = 4;
pub const NUM_SPECIALS: usize = 5;
pub const SPECIAL_TOKENS: [&str; NUM_SPECIALS] = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"];
pub const CONTINUATION: &str = "##";
/// Words longer than this (in characters) map straight to `[UNK]`.
pub const MAX_WORD_CHARS: usize = 100;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocab {
    pieces: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocab {
    /// Build from an ordered piece list; the first five entries must be the
    /// special tokens.
    pub fn from_pieces(pieces: Vec<String>) -> Result<Self> {
        if pieces.len() < NUM_SPECIALS || pieces[..NUM_SPECIALS].iter().zip(SPECIAL_TOKENS).any(|(p, s)| p != s) {
            return Err(Error::Vocab(format!("ids 0-4 must be {SPECIAL_TOKENS:?}")));
        }
        let mut index = HashMap::with_capacity(pieces.len());
        for (i, p) in pieces.iter().enumerate() {
            if p.is_empty() || p.chars().any(char::is_whitespace) {
                return Err(Error::Vocab(format!("invalid piece {p:?} at id {i}")));
            }
            if index.insert(p.clone(), i as u32).is_some() {
                return Err(Error::Vocab(format!("duplicate piece {p:?}")));
            }
        }
        Ok(Vocab { pieces, index })
    }

    /// Convenience constructor: specials followed by `pieces`.
    pub fn with_specials<I, S>(pieces: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let all = SPECIAL_TOKENS
            .iter()
            .map(|s| s.to_string())
            .chain(pieces.into_iter().map(Into::into))
            .collect();
        Self::from_pieces(all)
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn pieces(&self) -> &[String] {
        &self.pieces
    }

    pub fn id(&self, piece: &str) -> Option<u32> {
        self.index.get(piece).copied()
    }

    pub fn piece(&self, id: u32) -> Option<&str> {
        self.pieces.get(id as usize).map(String::as_str)
    }

    pub fn is_special(&self, id: u32) -> bool {
        (id as usize) < NUM_SPECIALS
    }

    pub fn is_continuation(&self, id: u32) -> bool {
        self.piece(id).is_some_and(|p| p.starts_with(CONTINUATION))
    }

    /// One piece per line, line number = id, trailing newline.
    pub fn to_file_string(&self) -> String {
        let mut out = String::with_capacity(self.pieces.iter().map(|p| p.len() + 1).sum());
        for p in &self.pieces {
            out.push_str(p);
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_pieces(text.lines().map(str::to_string).collect())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_file_string()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// 64-bit FNV-1a hash of the vocabulary file bytes.
    pub fn fingerprint(&self) -> u64 {
        fnv1a64(self.to_file_string().as_bytes())
    }
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    bytes.iter().fold(OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(PRIME))
}

fn is_split_char(c: char) -> bool {
    !c.is_alphanumeric() && !c.is_whitespace()
}

/// Split raw text into words: NFC-normalize, split on whitespace, and make
/// every punctuation or symbol character its own word.
pub fn pre_tokenize(text: &str) -> Vec<String> {
    let normalized: String = text.nfc().collect();
    let mut words = Vec::new();
    for chunk in normalized.split_whitespace() {
        let mut current = String::new();
        for c in chunk.chars() {
            if is_split_char(c) {
                if !current.is_empty() {
                    words.push(std::mem::take(&mut current));
                }
                words.push(c.to_string());
            } else {
                current.push(c);
            }
        }
        if !current.is_empty() {
            words.push(current);
        }
    }
    words
}

/// Greedy longest-match-first segmentation of a single word into piece ids.
/// Any position without a matching piece turns the whole word into `[UNK]`.
pub fn encode_word(vocab: &Vocab, word: &str) -> Vec<u32> {
    let chars: Vec<char> = word.nfc().collect();
    if chars.is_empty() || chars.len() > MAX_WORD_CHARS {
        return vec![UNK];
    }
    let mut out = Vec::new();
    let mut start = 0;
    let mut candidate = String::with_capacity(word.len() + 2);
    while start < chars.len() {
        let mut found = None;
        for end in (start + 1..=chars.len()).rev() {
            candidate.clear();
            if start > 0 {
                candidate.push_str(CONTINUATION);
            }
            candidate.extend(&chars[start..end]);
            if let Some(id) = vocab.id(&candidate) {
                found = Some((id, end));
                break;
            }
        }
        match found {
            Some((id, end)) => {
                out.push(id);
                start = end;
            }
            None => return vec![UNK],
        }
    }
    out
}

/// Piece strings for a word (useful for display).
pub fn word_pieces<'v>(vocab: &'v Vocab, word: &str) -> Vec<&'v str> {
    encode_word(vocab, word)
        .into_iter()
        .map(|id| vocab.piece(id).expect("encode_word yields valid ids"))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TokenSequence {
    pub ids: Vec<u32>,
    /// True at the first piece of each source word.
    pub word_start: Vec<bool>,
    pub source_words: Vec<String>,
}

impl TokenSequence {
    /// Positions of the first piece of each word, in word order.
    pub fn word_positions(&self) -> Vec<usize> {
        self.word_start
            .iter()
            .enumerate()
            .filter_map(|(i, &s)| s.then_some(i))
            .collect()
    }
}

pub fn encode_sentence<S: AsRef<str>>(vocab: &Vocab, words: &[S], add_specials: bool) -> TokenSequence {
    let mut ids = Vec::new();
    let mut word_start = Vec::new();
    if add_specials {
        ids.push(CLS);
        word_start.push(false);
    }
    for w in words {
        let pieces = encode_word(vocab, w.as_ref());
        for (k, id) in pieces.into_iter().enumerate() {
            ids.push(id);
            word_start.push(k == 0);
        }
    }
    if add_specials {
        ids.push(SEP);
        word_start.push(false);
    }
    TokenSequence {
        ids,
        word_start,
        source_words: words.iter().map(|w| w.as_ref().to_string()).collect(),
    }
}

/// Join pieces back into text: continuations attach to the previous piece,
/// word-initial pieces are separated by one space, specials are dropped.
pub fn decode(vocab: &Vocab, ids: &[u32]) -> Result<String> {
    let mut out = String::new();
    for &id in ids {
        let piece = vocab
            .piece(id)
            .ok_or(Error::TokenOutOfRange { id, size: vocab.len() })?;
        if vocab.is_special(id) {
            continue;
        }
        match piece.strip_prefix(CONTINUATION) {
            Some(rest) => out.push_str(rest),
            None => {
                if !out.is_empty() {
                    out.push(' ');
                }
                out.push_str(piece);
            }
        }
    }
    Ok(out)
}

/// Word frequencies over a corpus, after pre-tokenization.
pub fn word_counts(corpus: &DocumentSet) -> BTreeMap<String, u64> {
    let mut counts = BTreeMap::new();
    for doc in corpus.iter() {
        for line in doc.lines() {
            for w in pre_tokenize(line) {
                *counts.entry(w).or_insert(0) += 1;
            }
        }
    }
    counts
}

pub fn train_vocab(corpus: &DocumentSet, target_size: usize, min_frequency: u64) -> Result<Vocab> {
    if corpus.is_empty() {
        return Err(Error::Corpus("cannot train a vocabulary on an empty corpus".into()));
    }
    train_vocab_from_counts(&word_counts(corpus), target_size, min_frequency)
}

type Pair = (u32, u32);

/// Merge candidate ordering: higher score first, then higher pair
/// frequency, then lexicographically smaller (left, right) strings.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Candidate {
    pair_freq: u64,
    denom: u128,
    left: String,
    right: String,
    pair: Pair,
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        // score = pair_freq / denom, compared exactly by cross-multiplication
        let lhs = self.pair_freq as u128 * other.denom;
        let rhs = other.pair_freq as u128 * self.denom;
        rhs.cmp(&lhs)
            .then_with(|| other.pair_freq.cmp(&self.pair_freq))
            .then_with(|| self.left.cmp(&other.left))
            .then_with(|| self.right.cmp(&other.right))
            .then_with(|| self.pair.cmp(&other.pair))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Trainer {
    pieces: Vec<String>,
    piece_ids: HashMap<String, u32>,
    words: Vec<(Vec<u32>, u64)>,
    piece_freq: Vec<u64>,
    pair_freq: HashMap<Pair, u64>,
    pair_words: HashMap<Pair, HashSet<usize>>,
    piece_pairs: HashMap<u32, HashSet<Pair>>,
    current: HashMap<Pair, Candidate>,
    eligible: BTreeSet<Candidate>,
    rejected: BTreeSet<Candidate>,
    min_frequency: u64,
}

impl Trainer {
    fn intern(&mut self, piece: String) -> u32 {
        if let Some(&id) = self.piece_ids.get(&piece) {
            return id;
        }
        let id = self.pieces.len() as u32;
        self.piece_ids.insert(piece.clone(), id);
        self.pieces.push(piece);
        self.piece_freq.push(0);
        id
    }

    fn candidate(&self, pair: Pair) -> Option<Candidate> {
        let f = *self.pair_freq.get(&pair)?;
        if f == 0 {
            return None;
        }
        Some(Candidate {
            pair_freq: f,
            denom: self.piece_freq[pair.0 as usize] as u128 * self.piece_freq[pair.1 as usize] as u128,
            left: self.pieces[pair.0 as usize].clone(),
            right: self.pieces[pair.1 as usize].clone(),
            pair,
        })
    }

    fn refresh(&mut self, pair: Pair) {
        if let Some(old) = self.current.remove(&pair) {
            self.eligible.remove(&old);
            self.rejected.remove(&old);
        }
        if let Some(c) = self.candidate(pair) {
            if c.pair_freq >= self.min_frequency {
                self.eligible.insert(c.clone());
            } else {
                self.rejected.insert(c.clone());
            }
            self.current.insert(pair, c);
        }
    }

    fn add_word(&mut self, w: usize, touched: &mut HashSet<Pair>) {
        let (seg, count) = &self.words[w];
        let count = *count;
        for &p in seg {
            self.piece_freq[p as usize] += count;
        }
        for win in seg.windows(2) {
            let pair = (win[0], win[1]);
            *self.pair_freq.entry(pair).or_insert(0) += count;
            self.pair_words.entry(pair).or_default().insert(w);
            self.piece_pairs.entry(pair.0).or_default().insert(pair);
            self.piece_pairs.entry(pair.1).or_default().insert(pair);
            touched.insert(pair);
        }
    }

    fn remove_word(&mut self, w: usize, touched: &mut HashSet<Pair>) {
        let (seg, count) = &self.words[w];
        let count = *count;
        for &p in seg {
            self.piece_freq[p as usize] -= count;
        }
        for win in seg.windows(2) {
            let pair = (win[0], win[1]);
            if let Some(f) = self.pair_freq.get_mut(&pair) {
                *f -= count;
            }
            if let Some(ws) = self.pair_words.get_mut(&pair) {
                ws.remove(&w);
            }
            touched.insert(pair);
        }
    }

    fn merge(&mut self, pair: Pair) -> String {
        let left = &self.pieces[pair.0 as usize];
        let right = &self.pieces[pair.1 as usize];
        let merged = format!("{left}{}", right.strip_prefix(CONTINUATION).unwrap_or(right));
        let new_id = self.intern(merged.clone());

        let mut affected: Vec<usize> = self
            .pair_words
            .get(&pair)
            .map(|s| s.iter().copied().collect())
            .unwrap_or_default();
        affected.sort_unstable();

        let mut touched = HashSet::new();
        for &w in &affected {
            self.remove_word(w, &mut touched);
            let seg = &self.words[w].0;
            let mut next = Vec::with_capacity(seg.len());
            let mut i = 0;
            while i < seg.len() {
                if i + 1 < seg.len() && seg[i] == pair.0 && seg[i + 1] == pair.1 {
                    next.push(new_id);
                    i += 2;
                } else {
                    next.push(seg[i]);
                    i += 1;
                }
            }
            self.words[w].0 = next;
            self.add_word(w, &mut touched);
        }
        // pieces whose frequency moved change the score of every pair they sit in
        for piece in [pair.0, pair.1, new_id] {
            if let Some(ps) = self.piece_pairs.get(&piece) {
                touched.extend(ps.iter().copied());
            }
        }
        let mut touched: Vec<Pair> = touched.into_iter().collect();
        touched.sort_unstable();
        for p in touched {
            self.refresh(p);
        }
        merged
    }
}

/// Train from precomputed word counts; see [`train_vocab`].
///
/// The vocabulary starts with the specials and, for every observed
/// character `c`, both `c` and `##c`. Adjacent pieces are then merged
/// greedily by `freq(pair) / (freq(left) * freq(right))` until the target
/// size is reached. If eligible merges run out, the vocabulary is padded
/// with the best candidates rejected by `min_frequency`, then with
/// `[unusedN]` filler pieces, so the size is always exactly `target_size`.
pub fn train_vocab_from_counts(
    counts: &BTreeMap<String, u64>,
    target_size: usize,
    min_frequency: u64,
) -> Result<Vocab> {
    let mut alphabet = BTreeSet::new();
    for word in counts.keys() {
        for c in word.chars() {
            alphabet.insert(c.to_string());
            alphabet.insert(format!("{CONTINUATION}{c}"));
        }
    }
    let required = NUM_SPECIALS + alphabet.len();
    if target_size < required {
        return Err(Error::VocabTooSmall {
            requested: target_size,
            required,
        });
    }

    let mut vocab: Vec<String> = SPECIAL_TOKENS.iter().map(|s| s.to_string()).collect();
    vocab.extend(alphabet.iter().cloned());
    let mut in_vocab: HashSet<String> = vocab.iter().cloned().collect();

    let mut trainer = Trainer {
        pieces: Vec::new(),
        piece_ids: HashMap::new(),
        words: Vec::new(),
        piece_freq: Vec::new(),
        pair_freq: HashMap::new(),
        pair_words: HashMap::new(),
        piece_pairs: HashMap::new(),
        current: HashMap::new(),
        eligible: BTreeSet::new(),
        rejected: BTreeSet::new(),
        min_frequency: min_frequency.max(1),
    };
    for (word, &count) in counts {
        if word.chars().count() > MAX_WORD_CHARS {
            continue;
        }
        let seg: Vec<u32> = word
            .chars()
            .enumerate()
            .map(|(i, c)| {
                let piece = if i == 0 {
                    c.to_string()
                } else {
                    format!("{CONTINUATION}{c}")
                };
                trainer.intern(piece)
            })
            .collect();
        trainer.words.push((seg, count));
    }
    let mut touched = HashSet::new();
    for w in 0..trainer.words.len() {
        trainer.add_word(w, &mut touched);
    }
    let mut touched: Vec<Pair> = touched.into_iter().collect();
    touched.sort_unstable();
    for p in touched {
        trainer.refresh(p);
    }

    while vocab.len() < target_size {
        let Some(best) = trainer.eligible.first().cloned() else {
            break;
        };
        let merged = trainer.merge(best.pair);
        if in_vocab.insert(merged.clone()) {
            vocab.push(merged);
        }
    }

    let rejected: Vec<Candidate> = trainer.rejected.iter().cloned().collect();
    for c in rejected {
        if vocab.len() >= target_size {
            break;
        }
        let merged = format!("{}{}", c.left, c.right.strip_prefix(CONTINUATION).unwrap_or(&c.right));
        if in_vocab.insert(merged.clone()) {
            vocab.push(merged);
        }
    }
    let mut k = 0;
    while vocab.len() < target_size {
        let filler = format!("[unused{k}]");
        k += 1;
        if in_vocab.insert(filler.clone()) {
            vocab.push(filler);
        }
    }
    Vocab::from_pieces(vocab)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(text: &str) -> BTreeMap<String, u64> {
        let mut m = BTreeMap::new();
        for w in pre_tokenize(text) {
            *m.entry(w).or_insert(0) += 1;
        }
        m
    }

    #[test]
    fn single_merge_picks_most_frequent_pair() {
        let v = train_vocab_from_counts(&counts("aa aa ab"), 10, 1).unwrap();
        assert_eq!(v.len(), 10);
        assert_eq!(v.pieces()[5..9], ["##a", "##b", "a", "b"]);
        assert_eq!(v.pieces()[9], "aa");
    }

    #[test]
    fn no_merge_at_alphabet_size() {
        let v = train_vocab_from_counts(&counts("aa aa ab"), 9, 1).unwrap();
        assert_eq!(v.len(), 9);
        assert!(v.id("aa").is_none());
    }

    #[test]
    fn too_small_reports_minimum() {
        match train_vocab_from_counts(&counts("aa ab"), 6, 1) {
            Err(Error::VocabTooSmall { required, .. }) => assert_eq!(required, 9),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn padding_reaches_exact_size() {
        let v = train_vocab_from_counts(&counts("ab ab"), 40, 1).unwrap();
        assert_eq!(v.len(), 40);
        assert!(v.id("ab").is_some());
        assert!(v.id("[unused0]").is_some());
    }

    #[test]
    fn min_frequency_defers_rare_pairs_to_padding() {
        let v = train_vocab_from_counts(&counts("ab ab cd"), 15, 2).unwrap();
        // "ab" is merged, "cd" only appears once and is used as padding
        assert_eq!(v.pieces()[NUM_SPECIALS + 8], "ab");
        assert_eq!(v.pieces()[NUM_SPECIALS + 9], "cd");
    }

    #[test]
    fn casing_is_preserved() {
        let v = train_vocab_from_counts(&counts("Os os"), 11, 1).unwrap();
        assert!(v.id("O").is_some());
        assert!(v.id("o").is_some());
    }

    #[test]
    fn greedy_segmentation() {
        let v = Vocab::with_specials(["cam", "##iño", "c", "##a", "##m"]).unwrap();
        assert_eq!(word_pieces(&v, "camiño"), ["cam", "##iño"]);
        let v = Vocab::with_specials(["camiño", "cam", "##iño"]).unwrap();
        assert_eq!(word_pieces(&v, "camiño"), ["camiño"]);
        assert_eq!(encode_word(&v, "camiñoz"), [UNK]);
        assert_eq!(encode_word(&v, &"a".repeat(101)), [UNK]);
    }

    #[test]
    fn sentence_with_specials() {
        let v = Vocab::with_specials(["Os", "nosos"]).unwrap();
        let s = encode_sentence(&v, &["Os", "nosos"], false);
        assert_eq!(s.ids, [5, 6]);
        assert_eq!(s.word_start, [true, true]);
        let s = encode_sentence(&v, &["Os"], true);
        assert_eq!(s.ids, [CLS, 5, SEP]);
        assert_eq!(s.word_start, [false, true, false]);
    }

    #[test]
    fn decoding() {
        let v = Vocab::with_specials(["dix", "##éron", "##nos"]).unwrap();
        assert_eq!(decode(&v, &[CLS, 5, 6, 7, SEP]).unwrap(), "dixéronnos");
        assert_eq!(decode(&v, &[]).unwrap(), "");
        assert!(matches!(decode(&v, &[99]), Err(Error::TokenOutOfRange { id: 99, .. })));
    }

    #[test]
    fn pre_tokenization_splits_punctuation() {
        assert_eq!(pre_tokenize("o camiño era este."), ["o", "camiño", "era", "este", "."]);
    }

    #[test]
    fn vocab_file_round_trip() {
        let v = Vocab::with_specials(["a", "##b"]).unwrap();
        let text = v.to_file_string();
        assert_eq!(text, "[PAD]\n[UNK]\n[CLS]\n[SEP]\n[MASK]\na\n##b\n");
        assert_eq!(Vocab::parse(&text).unwrap(), v);
        assert!(Vocab::parse("[PAD]\n[UNK]\n[CLS]\n[SEP]\n[MASK]\na\na\n").is_err());
    }

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
    }
}
