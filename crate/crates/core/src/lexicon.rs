//! Identity pairs, the lexicon that holds them, and its TSV file formats.
//!
//! Lexicon file: `first<TAB>second<TAB>source<TAB>score` with a header row.
//! Placeholder map: `term<TAB>placeholder` with a header row. Lines starting
//! with `#` are comments (used for provenance stamps).

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairSource {
    Known,
    Augmented,
    AnalogyDiagnostic,
}

impl PairSource {
    pub fn as_str(self) -> &'static str {
        match self {
            PairSource::Known => "known",
            PairSource::Augmented => "augmented",
            PairSource::AnalogyDiagnostic => "analogy_diagnostic",
        }
    }
}

impl fmt::Display for PairSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PairSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "known" => Ok(PairSource::Known),
            "augmented" => Ok(PairSource::Augmented),
            "analogy_diagnostic" => Ok(PairSource::AnalogyDiagnostic),
            other => Err(format!("unknown pair source `{other}`")),
        }
    }
}

/// Two identity terms that can stand in for each other.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityPair {
    pub first: String,
    pub second: String,
    pub source: PairSource,
    /// Set-similarity score that admitted an augmented pair.
    pub score: Option<f64>,
}

impl IdentityPair {
    /// Build a pair, lowercasing both terms. Fails on empty terms, on terms
    /// containing whitespace, and on self-pairs.
    pub fn new(first: &str, second: &str, source: PairSource) -> Result<Self> {
        let first = first.trim().to_lowercase();
        let second = second.trim().to_lowercase();
        for term in [&first, &second] {
            if term.is_empty() || term.chars().any(char::is_whitespace) {
                return Err(Error::Data(format!("invalid identity term `{term}`")));
            }
        }
        if first == second {
            return Err(Error::Data(format!("self-pair `{first}`")));
        }
        Ok(IdentityPair {
            first,
            second,
            source,
            score: None,
        })
    }

    pub fn known(first: &str, second: &str) -> Result<Self> {
        Self::new(first, second, PairSource::Known)
    }

    pub fn with_score(mut self, score: f64) -> Self {
        self.score = Some(score);
        self
    }

    /// Order-independent identity of the pair.
    pub fn key(&self) -> (String, String) {
        unordered_key(&self.first, &self.second)
    }

    pub fn contains(&self, term: &str) -> bool {
        self.first == term || self.second == term
    }

    /// Same pair with `first <= second`.
    pub fn canonical(mut self) -> Self {
        if self.first > self.second {
            std::mem::swap(&mut self.first, &mut self.second);
        }
        self
    }
}

pub(crate) fn unordered_key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

/// Ordered identity pairs plus the derived term set.
///
/// Pairs are unique as unordered sets; `terms` always equals the union of
/// all pair members.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IdentityLexicon {
    pairs: Vec<IdentityPair>,
    terms: BTreeSet<String>,
    keys: HashSet<(String, String)>,
    placeholders: BTreeMap<String, String>,
}

impl IdentityLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Build from pairs, dropping later unordered duplicates.
    pub fn from_pairs(pairs: impl IntoIterator<Item = IdentityPair>) -> Self {
        let mut lex = Self::new();
        for p in pairs {
            lex.insert(p);
        }
        lex
    }

    /// Append a pair unless it is a self-pair or an unordered duplicate of a
    /// pair already present. Returns whether it was added.
    pub fn insert(&mut self, pair: IdentityPair) -> bool {
        if pair.first == pair.second || !self.keys.insert(pair.key()) {
            return false;
        }
        self.terms.insert(pair.first.clone());
        self.terms.insert(pair.second.clone());
        self.pairs.push(pair);
        true
    }

    pub fn contains_pair(&self, a: &str, b: &str) -> bool {
        self.keys.contains(&unordered_key(a, b))
    }

    pub fn pairs(&self) -> &[IdentityPair] {
        &self.pairs
    }

    pub fn terms(&self) -> &BTreeSet<String> {
        &self.terms
    }

    pub fn is_term(&self, token: &str) -> bool {
        self.terms.contains(token)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn placeholders(&self) -> &BTreeMap<String, String> {
        &self.placeholders
    }

    pub fn set_placeholders(&mut self, map: BTreeMap<String, String>) {
        self.placeholders = map;
    }

    pub fn placeholder_for<'a>(&'a self, term: &str, default: &'a str) -> &'a str {
        self.placeholders.get(term).map_or(default, String::as_str)
    }

    /// Every term paired with `term`, sorted ascending.
    pub fn partners(&self, term: &str) -> Vec<&str> {
        let mut out: Vec<&str> = self
            .pairs
            .iter()
            .filter_map(|p| {
                if p.first == term {
                    Some(p.second.as_str())
                } else if p.second == term {
                    Some(p.first.as_str())
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Serialize to the lexicon TSV format.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("first\tsecond\tsource\tscore\n");
        for p in &self.pairs {
            let score = p.score.map(|s| s.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                p.first, p.second, p.source, score
            ));
        }
        out
    }

    /// Stable content digest over pairs and placeholders.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.to_tsv().as_bytes());
        for (term, ph) in &self.placeholders {
            h.update(format!("{term}\t{ph}\n").as_bytes());
        }
        hex::encode(h.finalize())
    }

    /// Parse the lexicon TSV format. `source` and `score` columns are
    /// optional; a two-column `first<TAB>second` file reads as known pairs.
    pub fn parse_tsv(text: &str, origin: &Path) -> Result<Self> {
        let mut lines = data_lines(text);
        let (header_line, header) = lines
            .next()
            .ok_or_else(|| Error::parse(origin, 1, "missing header row"))?;
        let columns: Vec<&str> = header.split('\t').map(str::trim).collect();
        let expected = ["first", "second", "source", "score"];
        if columns.len() < 2 || columns.len() > 4 || columns[..] != expected[..columns.len()] {
            return Err(Error::parse(
                origin,
                header_line,
                "header must be `first<TAB>second[<TAB>source[<TAB>score]]`",
            ));
        }
        let mut lex = IdentityLexicon::new();
        for (line_no, line) in lines {
            let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
            if fields.len() < 2 || fields.len() > columns.len() {
                return Err(Error::parse(
                    origin,
                    line_no,
                    format!("expected {} tab-separated columns", columns.len()),
                ));
            }
            let source = match fields.get(2) {
                Some(s) if !s.is_empty() => s
                    .parse::<PairSource>()
                    .map_err(|m| Error::parse(origin, line_no, m))?,
                _ => PairSource::Known,
            };
            let mut pair = IdentityPair::new(fields[0], fields[1], source)
                .map_err(|e| Error::parse(origin, line_no, e.to_string()))?;
            if let Some(s) = fields.get(3).filter(|s| !s.is_empty()) {
                let score: f64 = s
                    .parse()
                    .map_err(|_| Error::parse(origin, line_no, format!("bad score `{s}`")))?;
                pair.score = Some(score);
            }
            lex.insert(pair);
        }
        Ok(lex)
    }

    pub fn read_tsv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_tsv(&text, path)
    }
}

/// Parse a `term<TAB>placeholder` file.
pub fn parse_placeholder_tsv(text: &str, origin: &Path) -> Result<BTreeMap<String, String>> {
    let mut lines = data_lines(text);
    match lines.next() {
        Some((_, h)) if h.split('\t').map(str::trim).eq(["term", "placeholder"]) => {}
        Some((n, _)) => {
            return Err(Error::parse(
                origin,
                n,
                "header must be `term<TAB>placeholder`",
            ))
        }
        None => return Err(Error::parse(origin, 1, "missing header row")),
    }
    let mut map = BTreeMap::new();
    for (line_no, line) in lines {
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        if fields.len() != 2 || fields[0].is_empty() {
            return Err(Error::parse(
                origin,
                line_no,
                "expected `term<TAB>placeholder`",
            ));
        }
        if !crate::text::is_placeholder(fields[1]) {
            return Err(Error::parse(
                origin,
                line_no,
                format!(
                    "placeholder `{}` must look like UPPER_CASE_TOKEN",
                    fields[1]
                ),
            ));
        }
        map.insert(fields[0].to_lowercase(), fields[1].to_string());
    }
    Ok(map)
}

pub fn read_placeholder_tsv(path: impl AsRef<Path>) -> Result<BTreeMap<String, String>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_placeholder_tsv(&text, path)
}

/// Non-blank, non-comment lines with 1-based line numbers.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
}
