//! Raw-text corpora, train/dev splitting and annotated task data.
//!
//! Raw corpora are UTF-8 text files in which documents are separated by
//! blank lines. Annotated data comes either as CoNLL-U (POS tags and
//! dependency trees) or as two-column BIO files (named entities).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The nine admissible NER tags: `O` plus `B-`/`I-` for four entity classes.
pub const NER_TAGS: [&str; 9] = [
    "O", "B-PER", "I-PER", "B-LOC", "I-LOC", "B-ORG", "I-ORG", "B-MISC", "I-MISC",
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    /// `<file name>#<block index>`.
    pub id: String,
    /// File the document was read from (file name only).
    pub source: String,
    pub text: String,
    /// 1-based line numbers of the first and last line of the block.
    pub first_line: usize,
    pub last_line: usize,
}

impl Document {
    /// Non-empty lines; each line is one unit of text for batching.
    pub fn lines(&self) -> impl Iterator<Item = &str> {
        self.text.lines().filter(|l| !l.trim().is_empty())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentSet {
    pub documents: Vec<Document>,
}

impl DocumentSet {
    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Document> {
        self.documents.iter()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitUnit {
    Document,
    File,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub unit: SplitUnit,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.95,
            unit: SplitUnit::Document,
        }
    }
}

fn read_utf8(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    String::from_utf8(bytes).map_err(|e| Error::InvalidUtf8 {
        path: path.to_path_buf(),
        offset: e.utf8_error().valid_up_to(),
    })
}

/// Split file content into blank-line separated blocks.
fn blocks(text: &str) -> Vec<(usize, usize, &str)> {
    let mut out = Vec::new();
    let mut start: Option<(usize, usize)> = None; // (byte offset, line no)
    let mut end_byte = 0;
    let mut last_line = 0;
    let mut offset = 0;
    for (idx, raw) in text.split_inclusive('\n').enumerate() {
        let line = raw.trim_end_matches(['\n', '\r']);
        if line.trim().is_empty() {
            if let Some((s, first)) = start.take() {
                out.push((first, last_line, &text[s..end_byte]));
            }
        } else {
            if start.is_none() {
                start = Some((offset, idx + 1));
            }
            end_byte = offset + line.len();
            last_line = idx + 1;
        }
        offset += raw.len();
    }
    if let Some((s, first)) = start {
        out.push((first, last_line, &text[s..end_byte]));
    }
    out
}

fn documents_from_file(path: &Path) -> Result<Vec<Document>> {
    let text = read_utf8(path)?;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(blocks(&text)
        .into_iter()
        .enumerate()
        .map(|(k, (first, last, body))| Document {
            id: format!("{name}#{k}"),
            source: name.clone(),
            text: body.to_string(),
            first_line: first,
            last_line: last,
        })
        .collect())
}

/// Load a raw-text corpus from a file or a directory of files.
///
/// Directory entries are visited in lexicographic file-name order
/// (non-recursively, regular files only); within a file documents keep
/// their on-disk order.
pub fn load_raw_corpus(path: impl AsRef<Path>) -> Result<DocumentSet> {
    let path = path.as_ref();
    let meta = fs::metadata(path).map_err(|e| Error::io(path, e))?;
    let mut files: Vec<PathBuf> = if meta.is_dir() {
        let mut files = Vec::new();
        for entry in fs::read_dir(path).map_err(|e| Error::io(path, e))? {
            let entry = entry.map_err(|e| Error::io(path, e))?;
            let p = entry.path();
            if p.is_file() {
                files.push(p);
            }
        }
        files
    } else {
        vec![path.to_path_buf()]
    };
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));

    let mut documents = Vec::new();
    for f in &files {
        documents.extend(documents_from_file(f)?);
    }
    Ok(DocumentSet { documents })
}

fn train_count(n: usize, fraction: f64) -> usize {
    let raw = (fraction * n as f64 - 1e-9).ceil();
    (raw.max(1.0) as usize).min(n - 1)
}

/// Deterministic prefix split: the first `⌈fraction·N⌉` units go to train,
/// the remainder to dev. Dev is clamped to at least one unit.
pub fn split_corpus(docs: &DocumentSet, spec: &SplitSpec) -> Result<(DocumentSet, DocumentSet)> {
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "train fraction must lie in (0, 1), got {}",
            spec.train_fraction
        )));
    }
    let boundary = match spec.unit {
        SplitUnit::Document => {
            if docs.len() < 2 {
                return Err(Error::Corpus(format!(
                    "need at least 2 documents to split, got {}",
                    docs.len()
                )));
            }
            train_count(docs.len(), spec.train_fraction)
        }
        SplitUnit::File => {
            let mut files: Vec<&str> = Vec::new();
            for d in &docs.documents {
                if files.last() != Some(&d.source.as_str()) {
                    files.push(&d.source);
                }
            }
            if files.len() < 2 {
                return Err(Error::Corpus(format!(
                    "need at least 2 files to split by file, got {}",
                    files.len()
                )));
            }
            let n_files = train_count(files.len(), spec.train_fraction);
            let first_dev = files[n_files];
            docs.documents
                .iter()
                .position(|d| d.source == first_dev)
                .unwrap_or(docs.len())
        }
    };
    let (train, dev) = docs.documents.split_at(boundary);
    Ok((
        DocumentSet {
            documents: train.to_vec(),
        },
        DocumentSet {
            documents: dev.to_vec(),
        },
    ))
}

/// Plain-text manifest recording a split: a header with the fraction, then
/// one `train\t<id>` / `dev\t<id>` line per document.
pub fn split_manifest(spec: &SplitSpec, train: &DocumentSet, dev: &DocumentSet) -> String {
    let mut out = String::new();
    let unit = match spec.unit {
        SplitUnit::Document => "document",
        SplitUnit::File => "file",
    };
    let _ = writeln!(out, "# train_fraction={}", spec.train_fraction);
    let _ = writeln!(out, "# unit={unit}");
    for d in &train.documents {
        let _ = writeln!(out, "train\t{}", d.id);
    }
    for d in &dev.documents {
        let _ = writeln!(out, "dev\t{}", d.id);
    }
    out
}

/// Lines of a CoNLL-U sentence that carry no word-level annotation: comments,
/// multiword-token ranges and empty nodes. Kept so files can be rewritten.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConlluExtras {
    pub comments: Vec<String>,
    /// `(index of the word the line precedes, raw line)`; the index may equal
    /// the word count for lines after the last word.
    pub side_lines: Vec<(usize, String)>,
    /// LEMMA, FEATS, DEPS and MISC columns per word.
    pub columns: Vec<[String; 4]>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedSentence {
    pub words: Vec<String>,
    pub upos: Option<Vec<String>>,
    pub fpos: Option<Vec<String>>,
    /// Head per word, 0 for the artificial root; words are 1-indexed.
    pub heads: Option<Vec<usize>>,
    pub deprels: Option<Vec<String>>,
    pub ner: Option<Vec<String>>,
    pub conllu: Option<ConlluExtras>,
}

impl AnnotatedSentence {
    pub fn new(words: Vec<String>) -> Self {
        AnnotatedSentence {
            words,
            ..Default::default()
        }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Check layer lengths and head well-formedness.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let n = self.words.len();
        let layers: [(&str, Option<usize>); 5] = [
            ("upos", self.upos.as_ref().map(Vec::len)),
            ("fpos", self.fpos.as_ref().map(Vec::len)),
            ("heads", self.heads.as_ref().map(Vec::len)),
            ("deprels", self.deprels.as_ref().map(Vec::len)),
            ("ner", self.ner.as_ref().map(Vec::len)),
        ];
        for (name, len) in layers {
            if let Some(len) = len {
                if len != n {
                    return Err(format!("{name} layer has {len} entries for {n} words"));
                }
            }
        }
        if let Some(heads) = &self.heads {
            for (i, &h) in heads.iter().enumerate() {
                if h > n {
                    return Err(format!("head {h} of word {} is out of range", i + 1));
                }
                if h == i + 1 {
                    return Err(format!("word {} is its own head", i + 1));
                }
            }
            let roots = heads.iter().filter(|&&h| h == 0).count();
            if roots != 1 {
                return Err(format!("expected exactly one root, found {roots}"));
            }
        }
        Ok(())
    }
}

fn optional_layer(values: Vec<String>) -> Option<Vec<String>> {
    if values.iter().all(|v| v == "_") {
        None
    } else {
        Some(values)
    }
}

struct SentenceBuilder {
    words: Vec<String>,
    upos: Vec<String>,
    fpos: Vec<String>,
    heads: Vec<Option<usize>>,
    deprels: Vec<String>,
    extras: ConlluExtras,
    first_line: usize,
}

impl SentenceBuilder {
    fn new(line: usize) -> Self {
        SentenceBuilder {
            words: Vec::new(),
            upos: Vec::new(),
            fpos: Vec::new(),
            heads: Vec::new(),
            deprels: Vec::new(),
            extras: ConlluExtras::default(),
            first_line: line,
        }
    }

    fn is_empty(&self) -> bool {
        self.words.is_empty() && self.extras.comments.is_empty() && self.extras.side_lines.is_empty()
    }

    fn finish(self, path: &Path) -> Result<AnnotatedSentence> {
        let heads = if self.heads.iter().all(Option::is_none) {
            None
        } else {
            let mut hs = Vec::with_capacity(self.heads.len());
            for (i, h) in self.heads.iter().enumerate() {
                hs.push(h.ok_or_else(|| Error::Parse {
                    path: path.to_path_buf(),
                    line: self.first_line,
                    message: format!("word {} has no head while others do", i + 1),
                })?);
            }
            Some(hs)
        };
        let has_extras = !self.extras.comments.is_empty()
            || !self.extras.side_lines.is_empty()
            || self.extras.columns.iter().any(|c| c.iter().any(|v| v != "_"));
        let sentence = AnnotatedSentence {
            words: self.words,
            upos: optional_layer(self.upos),
            fpos: optional_layer(self.fpos),
            heads,
            deprels: optional_layer(self.deprels),
            ner: None,
            conllu: has_extras.then_some(self.extras),
        };
        sentence.validate().map_err(|message| Error::Parse {
            path: path.to_path_buf(),
            line: self.first_line,
            message,
        })?;
        Ok(sentence)
    }
}

/// Parse CoNLL-U text. `path` is only used for diagnostics.
pub fn parse_conllu(text: &str, path: &Path) -> Result<Vec<AnnotatedSentence>> {
    let mut out = Vec::new();
    let mut current = SentenceBuilder::new(1);
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            if !current.is_empty() {
                let done = std::mem::replace(&mut current, SentenceBuilder::new(line_no + 1));
                out.push(done.finish(path)?);
            } else {
                current.first_line = line_no + 1;
            }
            continue;
        }
        if line.starts_with('#') {
            current.extras.comments.push(line.to_string());
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: line_no,
            message,
        };
        if cols.len() != 10 {
            return Err(parse_err(format!("expected 10 columns, found {}", cols.len())));
        }
        if cols[0].contains('-') || cols[0].contains('.') {
            current.extras.side_lines.push((current.words.len(), line.to_string()));
            continue;
        }
        let id: usize = cols[0]
            .parse()
            .map_err(|_| parse_err(format!("invalid word id {:?}", cols[0])))?;
        if id != current.words.len() + 1 {
            return Err(parse_err(format!(
                "word id {id} out of sequence, expected {}",
                current.words.len() + 1
            )));
        }
        let head = if cols[6] == "_" {
            None
        } else {
            Some(
                cols[6]
                    .parse::<usize>()
                    .map_err(|_| parse_err(format!("non-integer head {:?}", cols[6])))?,
            )
        };
        current.words.push(cols[1].to_string());
        current.upos.push(cols[3].to_string());
        current.fpos.push(cols[4].to_string());
        current.heads.push(head);
        current.deprels.push(cols[7].to_string());
        current.extras.columns.push([
            cols[2].to_string(),
            cols[5].to_string(),
            cols[8].to_string(),
            cols[9].to_string(),
        ]);
    }
    if !current.is_empty() {
        out.push(current.finish(path)?);
    }
    Ok(out)
}

pub fn read_conllu(path: impl AsRef<Path>) -> Result<Vec<AnnotatedSentence>> {
    let path = path.as_ref();
    parse_conllu(&read_utf8(path)?, path)
}

/// Render sentences as CoNLL-U. Missing layers are written as `_`.
pub fn conllu_string(sentences: &[AnnotatedSentence]) -> String {
    let mut out = String::new();
    let blank = ["_".to_string(), "_".to_string(), "_".to_string(), "_".to_string()];
    for s in sentences {
        let extras = s.conllu.as_ref();
        if let Some(e) = extras {
            for c in &e.comments {
                out.push_str(c);
                out.push('\n');
            }
        }
        let side = |i: usize, out: &mut String| {
            if let Some(e) = extras {
                for (_, l) in e.side_lines.iter().filter(|(at, _)| *at == i) {
                    out.push_str(l);
                    out.push('\n');
                }
            }
        };
        let get = |layer: &Option<Vec<String>>, i: usize| -> String {
            layer.as_ref().map(|v| v[i].clone()).unwrap_or_else(|| "_".to_string())
        };
        for (i, w) in s.words.iter().enumerate() {
            side(i, &mut out);
            let cols = extras.and_then(|e| e.columns.get(i)).unwrap_or(&blank);
            let head = s
                .heads
                .as_ref()
                .map(|h| h[i].to_string())
                .unwrap_or_else(|| "_".to_string());
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                i + 1,
                w,
                cols[0],
                get(&s.upos, i),
                get(&s.fpos, i),
                cols[1],
                head,
                get(&s.deprels, i),
                cols[2],
                cols[3]
            );
        }
        side(s.words.len(), &mut out);
        out.push('\n');
    }
    out
}

pub fn write_conllu(sentences: &[AnnotatedSentence], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, conllu_string(sentences)).map_err(|e| Error::io(path, e))
}

/// Parse two-column `token TAG` data (space or tab separated, blank line
/// between sentences). Tags land in the `ner` layer; when `admissible` is
/// given, tags outside it are rejected.
pub fn parse_tagged(text: &str, path: &Path, admissible: Option<&[&str]>) -> Result<Vec<AnnotatedSentence>> {
    let mut out = Vec::new();
    let mut words = Vec::new();
    let mut tags = Vec::new();
    let flush = |words: &mut Vec<String>, tags: &mut Vec<String>, out: &mut Vec<AnnotatedSentence>| {
        if !words.is_empty() {
            let mut s = AnnotatedSentence::new(std::mem::take(words));
            s.ner = Some(std::mem::take(tags));
            out.push(s);
        }
    };
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            flush(&mut words, &mut tags, &mut out);
            continue;
        }
        if line.starts_with("-DOCSTART-") {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: idx + 1,
                message: format!("expected 2 columns, found {}", fields.len()),
            });
        }
        if let Some(allowed) = admissible {
            if !allowed.contains(&fields[1]) {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    message: format!("unknown tag {:?}", fields[1]),
                });
            }
        }
        words.push(fields[0].to_string());
        tags.push(fields[1].to_string());
    }
    flush(&mut words, &mut tags, &mut out);
    Ok(out)
}

/// Read a BIO NER file restricted to [`NER_TAGS`].
pub fn read_bio(path: impl AsRef<Path>) -> Result<Vec<AnnotatedSentence>> {
    let path = path.as_ref();
    parse_tagged(&read_utf8(path)?, path, Some(&NER_TAGS))
}

/// Read a two-column tagged file with an open tag vocabulary.
pub fn read_tagged(path: impl AsRef<Path>) -> Result<Vec<AnnotatedSentence>> {
    let path = path.as_ref();
    parse_tagged(&read_utf8(path)?, path, None)
}

pub fn tagged_string(sentences: &[(Vec<String>, Vec<String>)]) -> String {
    let mut out = String::new();
    for (words, tags) in sentences {
        for (w, t) in words.iter().zip(tags) {
            let _ = writeln!(out, "{w}\t{t}");
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp() -> tempfile::TempDir {
        tempfile::tempdir().unwrap()
    }

    fn docs(n: usize) -> DocumentSet {
        DocumentSet {
            documents: (0..n)
                .map(|i| Document {
                    id: format!("f#{i}"),
                    source: "f".into(),
                    text: format!("doc {i}"),
                    first_line: 1,
                    last_line: 1,
                })
                .collect(),
        }
    }

    #[test]
    fn directory_order_is_lexicographic() {
        let dir = tmp();
        fs::write(dir.path().join("b.txt"), "Doc2.").unwrap();
        fs::write(dir.path().join("a.txt"), "Doc1.").unwrap();
        let set = load_raw_corpus(dir.path()).unwrap();
        let texts: Vec<_> = set.iter().map(|d| d.text.as_str()).collect();
        assert_eq!(texts, ["Doc1.", "Doc2."]);
        assert_eq!(set.documents[0].id, "a.txt#0");
    }

    #[test]
    fn empty_directory() {
        let dir = tmp();
        assert!(load_raw_corpus(dir.path()).unwrap().is_empty());
    }

    #[test]
    fn blank_lines_separate_documents() {
        let dir = tmp();
        let f = dir.path().join("x.txt");
        fs::write(&f, "First line.\nSecond line.\n\n\nOther doc.\n").unwrap();
        let set = load_raw_corpus(&f).unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.documents[0].text, "First line.\nSecond line.");
        assert_eq!((set.documents[0].first_line, set.documents[0].last_line), (1, 2));
        assert_eq!(set.documents[1].text, "Other doc.");
        assert_eq!(set.documents[1].first_line, 5);
    }

    #[test]
    fn invalid_utf8_reports_offset() {
        let dir = tmp();
        let f = dir.path().join("bad.txt");
        fs::write(&f, b"abc\xff").unwrap();
        match load_raw_corpus(&f) {
            Err(Error::InvalidUtf8 { offset, path }) => {
                assert_eq!(offset, 3);
                assert!(path.ends_with("bad.txt"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn split_sizes() {
        let spec = |f| SplitSpec {
            train_fraction: f,
            unit: SplitUnit::Document,
        };
        let (t, d) = split_corpus(&docs(100), &spec(0.95)).unwrap();
        assert_eq!((t.len(), d.len()), (95, 5));
        let (t, d) = split_corpus(&docs(2), &spec(0.95)).unwrap();
        assert_eq!((t.len(), d.len()), (1, 1));
        let (t, d) = split_corpus(&docs(40), &spec(0.5)).unwrap();
        assert_eq!((t.len(), d.len()), (20, 20));
        assert!(split_corpus(&docs(1), &spec(0.5)).is_err());
    }

    #[test]
    fn split_by_file() {
        let mut set = docs(6);
        for (i, d) in set.documents.iter_mut().enumerate() {
            d.source = format!("f{}", i / 2);
        }
        let spec = SplitSpec {
            train_fraction: 0.5,
            unit: SplitUnit::File,
        };
        let (t, d) = split_corpus(&set, &spec).unwrap();
        assert_eq!((t.len(), d.len()), (4, 2));
    }

    #[test]
    fn manifest_lists_every_document() {
        let spec = SplitSpec::default();
        let (t, d) = split_corpus(&docs(3), &spec).unwrap();
        let m = split_manifest(&spec, &t, &d);
        assert!(m.starts_with("# train_fraction=0.95\n"));
        assert_eq!(m.lines().filter(|l| l.starts_with("train\t")).count(), 2);
        assert_eq!(m.lines().filter(|l| l.starts_with("dev\t")).count(), 1);
    }

    const TWO_WORDS: &str = "1\tola\t_\tINTJ\tI\t_\t0\troot\t_\t_\n2\tmundo\t_\tNOUN\tNC\t_\t1\tobj\t_\t_\n\n";

    #[test]
    fn conllu_fields() {
        let s = parse_conllu(TWO_WORDS, Path::new("t")).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].heads, Some(vec![0, 1]));
        assert_eq!(s[0].deprels, Some(vec!["root".into(), "obj".into()]));
        assert_eq!(s[0].fpos, Some(vec!["I".into(), "NC".into()]));
        assert!(s[0].conllu.is_none());
    }

    #[test]
    fn conllu_comments_and_ranges() {
        let text = "# sent_id = 1\n1\tVou\t_\tVERB\t_\t_\t0\troot\t_\t_\n2-3\tao\t_\t_\t_\t_\t_\t_\t_\t_\n2\ta\t_\tADP\t_\t_\t4\tcase\t_\t_\n3\to\t_\tDET\t_\t_\t4\tdet\t_\t_\n4\tcine\t_\tNOUN\t_\t_\t1\tobl\t_\t_\n\n";
        let s = parse_conllu(text, Path::new("t")).unwrap();
        assert_eq!(s[0].words, ["Vou", "a", "o", "cine"]);
        let extras = s[0].conllu.as_ref().unwrap();
        assert_eq!(extras.comments, ["# sent_id = 1"]);
        assert_eq!(extras.side_lines[0].0, 1);
        assert_eq!(conllu_string(&s), text);
    }

    #[test]
    fn conllu_errors() {
        let err = parse_conllu("1\tola\t_\n", Path::new("t")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = parse_conllu("1\tola\t_\tX\t_\t_\tzero\troot\t_\t_\n", Path::new("t")).unwrap_err();
        assert!(err.to_string().contains("non-integer head"));
    }

    #[test]
    fn conllu_round_trip_file() {
        let dir = tmp();
        let s = parse_conllu(TWO_WORDS, Path::new("t")).unwrap();
        let f = dir.path().join("o.conllu");
        write_conllu(&s, &f).unwrap();
        assert_eq!(read_conllu(&f).unwrap(), s);
        write_conllu(&[], &f).unwrap();
        assert_eq!(fs::read_to_string(&f).unwrap(), "");
    }

    #[test]
    fn bio_reading() {
        let s = parse_tagged("Xoán B-PER\nvive O\n", Path::new("t"), Some(&NER_TAGS)).unwrap();
        assert_eq!(s[0].ner, Some(vec!["B-PER".into(), "O".into()]));
        assert_eq!(NER_TAGS.len(), 9);
        let err = parse_tagged("foo X-PER\n", Path::new("t"), Some(&NER_TAGS)).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }
}
