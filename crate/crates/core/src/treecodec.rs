//! Dependency parsing as sequence labeling with a bracketing encoding.
//!
//! Each word gets one atomic label describing its own incoming arc
//! (`<` head to the right, `>` head to the left, or root) and how many
//! dependents it has on each side (`\` per left dependent, `/` per right
//! dependent), followed by `@` and the dependency relation:
//!
//! ```text
//! label := ( "ROOT" | "<"? "\"* "/"* ">"? ) "@" deprel
//! ```
//!
//! A label with neither `<` nor `>` belongs to a root word; `ROOT` spells
//! a root word without dependents.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DepTree {
    /// Head of each word; 0 is the artificial root, words are 1-indexed.
    pub heads: Vec<usize>,
    pub deprels: Vec<String>,
}

impl DepTree {
    pub fn new(heads: Vec<usize>, deprels: Vec<String>) -> Result<Self> {
        let tree = DepTree { heads, deprels };
        tree.validate()?;
        Ok(tree)
    }

    pub fn len(&self) -> usize {
        self.heads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heads.is_empty()
    }

    /// Single root, heads in range, no self-loops, acyclic.
    pub fn validate(&self) -> Result<()> {
        let n = self.heads.len();
        if n == 0 {
            return Err(Error::Tree("empty tree".into()));
        }
        if self.deprels.len() != n {
            return Err(Error::Tree(format!("{} deprels for {n} words", self.deprels.len())));
        }
        let mut roots = 0;
        for (i, &h) in self.heads.iter().enumerate() {
            if h > n {
                return Err(Error::Tree(format!("head {h} of word {} out of range", i + 1)));
            }
            if h == i + 1 {
                return Err(Error::Tree(format!("word {} is its own head", i + 1)));
            }
            roots += (h == 0) as usize;
        }
        if roots != 1 {
            return Err(Error::Tree(format!("expected one root, found {roots}")));
        }
        for start in 1..=n {
            let mut node = start;
            let mut steps = 0;
            while node != 0 {
                node = self.heads[node - 1];
                steps += 1;
                if steps > n {
                    return Err(Error::Tree(format!("cycle through word {start}")));
                }
            }
        }
        Ok(())
    }
}

/// True iff no two arcs cross; root arcs count with endpoint 0.
pub fn is_projective(tree: &DepTree) -> bool {
    let arcs: Vec<(usize, usize)> = tree
        .heads
        .iter()
        .enumerate()
        .map(|(i, &h)| (h.min(i + 1), h.max(i + 1)))
        .collect();
    for (k, &(a1, b1)) in arcs.iter().enumerate() {
        for &(a2, b2) in &arcs[k + 1..] {
            if (a1 < a2 && a2 < b1 && b1 < b2) || (a2 < a1 && a1 < b2 && b2 < b1) {
                return false;
            }
        }
    }
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Incoming {
    /// Head lies to the left (`>`).
    FromLeft,
    /// Head lies to the right (`<`).
    FromRight,
    Root,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BracketLabel {
    pub incoming: Incoming,
    pub n_left_deps: usize,
    pub n_right_deps: usize,
    pub deprel: String,
}

impl fmt::Display for BracketLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.incoming == Incoming::Root && self.n_left_deps == 0 && self.n_right_deps == 0 {
            return write!(f, "ROOT@{}", self.deprel);
        }
        if self.incoming == Incoming::FromRight {
            f.write_str("<")?;
        }
        for _ in 0..self.n_left_deps {
            f.write_str("\\")?;
        }
        for _ in 0..self.n_right_deps {
            f.write_str("/")?;
        }
        if self.incoming == Incoming::FromLeft {
            f.write_str(">")?;
        }
        write!(f, "@{}", self.deprel)
    }
}

impl FromStr for BracketLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::BracketLabel(s.to_string());
        let (body, deprel) = s.split_once('@').ok_or_else(bad)?;
        if deprel.is_empty() {
            return Err(bad());
        }
        let deprel = deprel.to_string();
        if body == "ROOT" {
            return Ok(BracketLabel {
                incoming: Incoming::Root,
                n_left_deps: 0,
                n_right_deps: 0,
                deprel,
            });
        }
        let mut rest = body;
        let from_right = rest.starts_with('<');
        if from_right {
            rest = &rest[1..];
        }
        let from_left = rest.ends_with('>');
        if from_left {
            rest = &rest[..rest.len() - 1];
        }
        let n_left_deps = rest.chars().take_while(|&c| c == '\\').count();
        let n_right_deps = rest[n_left_deps..].chars().take_while(|&c| c == '/').count();
        if n_left_deps + n_right_deps != rest.len() || (from_left && from_right) {
            return Err(bad());
        }
        let incoming = match (from_left, from_right) {
            (true, false) => Incoming::FromLeft,
            (false, true) => Incoming::FromRight,
            _ => Incoming::Root,
        };
        if incoming == Incoming::Root && n_left_deps + n_right_deps == 0 {
            return Err(bad());
        }
        Ok(BracketLabel {
            incoming,
            n_left_deps,
            n_right_deps,
            deprel,
        })
    }
}

/// Encode a projective tree as one bracket label per word.
pub fn encode_tree(tree: &DepTree) -> Result<Vec<BracketLabel>> {
    tree.validate()?;
    if !is_projective(tree) {
        return Err(Error::NonProjective);
    }
    let n = tree.len();
    let mut left = vec![0usize; n + 1];
    let mut right = vec![0usize; n + 1];
    for (j, &h) in tree.heads.iter().enumerate() {
        let d = j + 1;
        if h > d {
            left[h] += 1;
        } else if h != 0 {
            right[h] += 1;
        }
    }
    Ok(tree
        .heads
        .iter()
        .enumerate()
        .map(|(j, &h)| {
            let i = j + 1;
            BracketLabel {
                incoming: if h == 0 {
                    Incoming::Root
                } else if h < i {
                    Incoming::FromLeft
                } else {
                    Incoming::FromRight
                },
                n_left_deps: left[i],
                n_right_deps: right[i],
                deprel: tree.deprels[j].clone(),
            }
        })
        .collect())
}

/// What the decoder had to fix to produce a well-formed tree.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairReport {
    /// `\` symbols that found no waiting word.
    pub missing_left_dependents: usize,
    /// `>` symbols that found no open right arc.
    pub missing_left_heads: usize,
    /// `<` words still waiting for a head at the end of the sentence.
    pub missing_right_heads: usize,
    /// Open right arcs never claimed.
    pub unclaimed_right_arcs: usize,
    /// No root label: word 1 was promoted.
    pub promoted_root: usize,
    /// Additional root labels attached under the first root.
    pub extra_roots: usize,
    /// Words left without a head, attached to the root word.
    pub unattached: usize,
    pub cycles: usize,
}

impl RepairReport {
    pub fn total(&self) -> usize {
        self.missing_left_dependents
            + self.missing_left_heads
            + self.missing_right_heads
            + self.unclaimed_right_arcs
            + self.promoted_root
            + self.extra_roots
            + self.unattached
            + self.cycles
    }

    pub fn is_clean(&self) -> bool {
        self.total() == 0
    }
}

/// Decode bracket labels with two stacks and repair whatever is malformed.
///
/// Per word, in order: pop the left stack once per `\` (each popped word
/// gets this head), push the word on the left stack if its head is to the
/// right, pop the right stack if its head is to the left, and push it on
/// the right stack once per `/`.
pub fn decode_labels(labels: &[BracketLabel]) -> Result<(DepTree, RepairReport)> {
    if labels.is_empty() {
        return Err(Error::Tree("cannot decode an empty label sequence".into()));
    }
    let n = labels.len();
    let mut heads: Vec<Option<usize>> = vec![None; n];
    let mut report = RepairReport::default();
    let mut left_stack: Vec<usize> = Vec::new();
    let mut right_stack: Vec<usize> = Vec::new();
    for (j, label) in labels.iter().enumerate() {
        let i = j + 1;
        for _ in 0..label.n_left_deps {
            match left_stack.pop() {
                Some(d) => heads[d - 1] = Some(i),
                None => report.missing_left_dependents += 1,
            }
        }
        match label.incoming {
            Incoming::FromRight => left_stack.push(i),
            Incoming::FromLeft => match right_stack.pop() {
                Some(h) => heads[j] = Some(h),
                None => report.missing_left_heads += 1,
            },
            Incoming::Root => {}
        }
        for _ in 0..label.n_right_deps {
            right_stack.push(i);
        }
    }
    report.missing_right_heads = left_stack.len();
    report.unclaimed_right_arcs = right_stack.len();
    let is_root: Vec<bool> = labels.iter().map(|l| l.incoming == Incoming::Root).collect();
    let deprels = labels.iter().map(|l| l.deprel.clone()).collect();
    let (tree, fixes) = repair(&heads, &is_root, deprels);
    report.promoted_root = fixes.promoted_root;
    report.extra_roots = fixes.extra_roots;
    report.unattached = fixes.unattached;
    report.cycles = fixes.cycles;
    Ok((tree, report))
}

/// Turn partial head assignments into a valid single-root tree.
///
/// `heads[i]` is the proposed head of word `i + 1` (`None` if unassigned);
/// `is_root[i]` marks words labeled as root. Rules, in order:
/// the first root-labeled word is the root (word 1 if there is none);
/// cycles are broken by attaching their smallest word to the root (a
/// cycle through the root word is broken at the root itself);
/// other root-labeled words attach to the root; unassigned, self-headed or
/// out-of-range words attach to the root.
pub fn repair(heads: &[Option<usize>], is_root: &[bool], deprels: Vec<String>) -> (DepTree, RepairReport) {
    let n = heads.len();
    let mut report = RepairReport::default();
    let root = match is_root.iter().position(|&r| r) {
        Some(r) => r + 1,
        None => {
            report.promoted_root = 1;
            1
        }
    };
    let mut proposed: Vec<Option<usize>> = heads
        .iter()
        .enumerate()
        .map(|(j, h)| {
            if is_root[j] {
                None
            } else {
                h.filter(|&h| h >= 1 && h <= n && h != j + 1)
            }
        })
        .collect();

    // colors: 0 unvisited, 1 on current path, 2 done
    let mut color = vec![0u8; n + 1];
    for start in 1..=n {
        if color[start] != 0 {
            continue;
        }
        let mut path = Vec::new();
        let mut node = start;
        loop {
            if color[node] == 2 {
                break;
            }
            if color[node] == 1 {
                let pos = path.iter().position(|&p| p == node).expect("node on path");
                let cycle = &path[pos..];
                if cycle.contains(&root) {
                    proposed[root - 1] = None;
                } else {
                    let smallest = *cycle.iter().min().expect("non-empty cycle");
                    proposed[smallest - 1] = Some(root);
                }
                report.cycles += 1;
                break;
            }
            color[node] = 1;
            path.push(node);
            match proposed[node - 1] {
                Some(h) => node = h,
                None => break,
            }
        }
        for p in path {
            color[p] = 2;
        }
    }

    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let i = j + 1;
        let h = if i == root {
            0
        } else if is_root[j] {
            report.extra_roots += 1;
            root
        } else {
            match proposed[j] {
                Some(h) => h,
                None => {
                    report.unattached += 1;
                    root
                }
            }
        };
        out.push(h);
    }
    let tree = DepTree { heads: out, deprels };
    debug_assert!(tree.validate().is_ok(), "repair produced {tree:?}");
    (tree, report)
}

/// Random projective tree by recursive interval splitting: pick a head for
/// the interval, then cut each side into sub-intervals whose own heads
/// attach to it.
pub fn random_projective_tree<R: Rng + ?Sized>(n: usize, deprels: &[&str], rng: &mut R) -> Result<DepTree> {
    if n == 0 {
        return Err(Error::InvalidArgument("tree size must be at least 1".into()));
    }
    if deprels.is_empty() {
        return Err(Error::InvalidArgument("need at least one deprel".into()));
    }
    let mut heads = vec![0usize; n];
    // (lo, hi, parent) intervals over 1-based positions, inclusive
    let mut work = vec![(1usize, n, 0usize)];
    while let Some((lo, hi, parent)) = work.pop() {
        let h = rng.gen_range(lo..=hi);
        heads[h - 1] = parent;
        for (a, b) in [(lo, h - 1), (h + 1, hi)] {
            if a > b {
                continue;
            }
            let mut start = a;
            while start <= b {
                let end = rng.gen_range(start..=b);
                work.push((start, end, h));
                start = end + 1;
            }
        }
    }
    let labels = (0..n)
        .map(|j| {
            if heads[j] == 0 {
                "root".to_string()
            } else {
                deprels[rng.gen_range(0..deprels.len())].to_string()
            }
        })
        .collect();
    DepTree::new(heads, labels)
}
