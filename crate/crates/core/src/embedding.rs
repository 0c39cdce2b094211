//! Word-embedding tables and cosine nearest-neighbour queries.
//!
//! Tables are read from the GloVe text format (`token v1 v2 ... vd`, one
//! token per line). Tokens are lowercased on load and on every query. All
//! neighbour searches are exact brute-force scans; ties are broken by
//! ascending token so results are fully deterministic.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use log::warn;

use crate::error::{Error, Result};

/// One ranked neighbour of a query.
#[derive(Debug, Clone, PartialEq)]
pub struct Neighbor {
    pub token: String,
    pub score: f64,
}

/// Immutable vocabulary → vector table.
///
/// Row order is file order, which for GloVe releases is descending corpus
/// frequency; [`EmbeddingModel::rank`] exposes it.
#[derive(Debug, Clone)]
pub struct EmbeddingModel {
    vocab: Vec<String>,
    index: HashMap<String, usize>,
    dim: usize,
    vectors: Vec<f64>,
    norms: Vec<f64>,
}

impl EmbeddingModel {
    /// Build a model from `(token, vector)` rows. Tokens are lowercased and
    /// duplicates after lowercasing keep the first row.
    pub fn from_rows<S, I>(rows: I) -> Result<Self>
    where
        S: AsRef<str>,
        I: IntoIterator<Item = (S, Vec<f64>)>,
    {
        let mut builder = Builder::new(None);
        for (line, (token, vector)) in rows.into_iter().enumerate() {
            builder.push(line + 1, token.as_ref(), vector)?;
        }
        builder.finish()
    }

    /// Load a GloVe text file.
    pub fn load(path: impl AsRef<Path>, expected_dim: Option<usize>) -> Result<Self> {
        Self::load_limited(path, expected_dim, None)
    }

    /// Load at most `max_words` distinct tokens from a GloVe text file.
    ///
    /// GloVe files are frequency sorted, so this keeps the most frequent words.
    pub fn load_limited(
        path: impl AsRef<Path>,
        expected_dim: Option<usize>,
        max_words: Option<usize>,
    ) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(BufReader::new(file), path, expected_dim, max_words)
    }

    /// Parse GloVe text from any buffered reader. `origin` is only used in
    /// error messages.
    pub fn from_reader<R: BufRead>(
        mut reader: R,
        origin: &Path,
        expected_dim: Option<usize>,
        max_words: Option<usize>,
    ) -> Result<Self> {
        if expected_dim == Some(0) {
            return Err(Error::Config("expected dimension must be positive".into()));
        }
        let mut builder = Builder::new(expected_dim);
        let mut buf = String::new();
        let mut line_no = 0usize;
        loop {
            if max_words.is_some_and(|m| builder.vocab.len() >= m) {
                break;
            }
            buf.clear();
            let n = reader
                .read_line(&mut buf)
                .map_err(|e| Error::io(origin, e))?;
            if n == 0 {
                break;
            }
            line_no += 1;
            let line = buf.trim_end_matches(['\n', '\r']);
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let token = fields.next().unwrap_or_default();
            let mut vector = Vec::with_capacity(builder.dim.unwrap_or(0));
            for field in fields {
                let value: f64 = field.parse().map_err(|_| {
                    Error::parse(
                        origin,
                        line_no,
                        format!("cannot parse `{field}` as a number"),
                    )
                })?;
                if !value.is_finite() {
                    return Err(Error::parse(
                        origin,
                        line_no,
                        format!("non-finite component `{field}`"),
                    ));
                }
                vector.push(value);
            }
            if vector.is_empty() {
                return Err(Error::parse(
                    origin,
                    line_no,
                    "line has no vector components",
                ));
            }
            builder.push(line_no, token, vector)?;
        }
        builder.finish()
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    /// Row index of `token` (lowercased before lookup).
    pub fn lookup(&self, token: &str) -> Option<usize> {
        match self.index.get(token) {
            Some(&i) => Some(i),
            None => self.index.get(&token.to_lowercase()).copied(),
        }
    }

    pub fn contains(&self, token: &str) -> bool {
        self.lookup(token).is_some()
    }

    /// Frequency rank of a token: its row position in the source file.
    pub fn rank(&self, token: &str) -> Option<usize> {
        self.lookup(token)
    }

    pub fn token(&self, row: usize) -> &str {
        &self.vocab[row]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.vectors[row * self.dim..(row + 1) * self.dim]
    }

    pub fn vector(&self, token: &str) -> Option<&[f64]> {
        self.lookup(token).map(|i| self.row(i))
    }

    fn require(&self, token: &str) -> Result<usize> {
        self.lookup(token)
            .ok_or_else(|| Error::OutOfVocabulary(token.to_string()))
    }

    fn cosine_rows(&self, a: usize, b: usize) -> f64 {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        dot(self.row(a), self.row(b)) / (self.norms[a] * self.norms[b])
    }

    /// Cosine similarity of two vocabulary tokens.
    pub fn similarity(&self, a: &str, b: &str) -> Result<f64> {
        let ia = self.require(a)?;
        let ib = self.require(b)?;
        Ok(self.cosine_rows(ia, ib))
    }

    /// The `k` tokens most similar to `term`, excluding `term` itself.
    pub fn top_k_similar(&self, term: &str, k: usize) -> Result<Vec<Neighbor>> {
        let row = self.require(term)?;
        Ok(self.materialize(self.top_k_rows(row, k)))
    }

    /// Row-index form of [`top_k_similar`](Self::top_k_similar).
    pub fn top_k_rows(&self, row: usize, k: usize) -> Vec<(usize, f64)> {
        let scores = (0..self.len())
            .filter(|&r| r != row)
            .map(|r| (r, self.cosine_rows(row, r)));
        self.select_top(scores, k)
    }

    /// The `k` tokens nearest (by cosine) to an arbitrary vector, skipping
    /// the rows in `exclude`. A zero query vector scores every row as 0.
    pub fn nearest_to_vector(&self, query: &[f64], k: usize, exclude: &[usize]) -> Vec<Neighbor> {
        assert_eq!(query.len(), self.dim, "query dimension mismatch");
        let qn = dot(query, query).sqrt();
        let scores = (0..self.len()).filter(|r| !exclude.contains(r)).map(|r| {
            let s = if qn > 0.0 {
                dot(query, self.row(r)) / (qn * self.norms[r])
            } else {
                0.0
            };
            (r, s)
        });
        self.materialize(self.select_top(scores, k))
    }

    /// Neighbours of `w(term2) + w(term1p) - w(term1)`, excluding the three
    /// input tokens.
    pub fn analogy_neighbors(
        &self,
        term1: &str,
        term2: &str,
        term1p: &str,
        k: usize,
    ) -> Result<Vec<Neighbor>> {
        let a = self.require(term1)?;
        let b = self.require(term2)?;
        let c = self.require(term1p)?;
        let composed: Vec<f64> = self
            .row(b)
            .iter()
            .zip(self.row(c))
            .zip(self.row(a))
            .map(|((&vb, &vc), &va)| vb + vc - va)
            .collect();
        Ok(self.nearest_to_vector(&composed, k, &[a, b, c]))
    }

    fn materialize(&self, rows: Vec<(usize, f64)>) -> Vec<Neighbor> {
        rows.into_iter()
            .map(|(r, score)| Neighbor {
                token: self.vocab[r].clone(),
                score,
            })
            .collect()
    }

    /// Keep the `k` best `(row, score)` entries: descending score, then
    /// ascending token.
    fn select_top(
        &self,
        scores: impl Iterator<Item = (usize, f64)>,
        k: usize,
    ) -> Vec<(usize, f64)> {
        if k == 0 {
            return Vec::new();
        }
        let mut heap: BinaryHeap<Ranked<'_>> = BinaryHeap::with_capacity(k + 1);
        for (row, score) in scores {
            let cand = Ranked {
                score,
                token: &self.vocab[row],
                row,
            };
            if heap.len() < k {
                heap.push(cand);
            } else if let Some(worst) = heap.peek() {
                if cand.cmp(worst) == Ordering::Less {
                    heap.pop();
                    heap.push(cand);
                }
            }
        }
        heap.into_sorted_vec()
            .into_iter()
            .map(|r| (r.row, r.score))
            .collect()
    }
}

/// Heap entry ordered so that "better" neighbours compare as `Less`; the
/// max-heap top is therefore the worst retained candidate.
struct Ranked<'a> {
    score: f64,
    token: &'a str,
    row: usize,
}

impl Ord for Ranked<'_> {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .score
            .total_cmp(&self.score)
            .then_with(|| self.token.cmp(other.token))
    }
}

impl PartialOrd for Ranked<'_> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Ranked<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Ranked<'_> {}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Builder {
    dim: Option<usize>,
    vocab: Vec<String>,
    index: HashMap<String, usize>,
    vectors: Vec<f64>,
    norms: Vec<f64>,
}

impl Builder {
    fn new(dim: Option<usize>) -> Self {
        Builder {
            dim,
            vocab: Vec::new(),
            index: HashMap::new(),
            vectors: Vec::new(),
            norms: Vec::new(),
        }
    }

    fn push(&mut self, line: usize, token: &str, vector: Vec<f64>) -> Result<()> {
        let expected = *self.dim.get_or_insert(vector.len());
        if vector.len() != expected {
            return Err(Error::DimensionMismatch {
                line,
                expected,
                found: vector.len(),
            });
        }
        let token = token.to_lowercase();
        if token.is_empty() {
            return Err(Error::Data(format!("line {line}: empty token")));
        }
        let norm = dot(&vector, &vector).sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroNorm { line, token });
        }
        if self.index.contains_key(&token) {
            warn!("line {line}: duplicate token `{token}` ignored, keeping first occurrence");
            return Ok(());
        }
        self.index.insert(token.clone(), self.vocab.len());
        self.vocab.push(token);
        self.vectors.extend_from_slice(&vector);
        self.norms.push(norm);
        Ok(())
    }

    fn finish(self) -> Result<EmbeddingModel> {
        if self.vocab.is_empty() {
            return Err(Error::EmptyEmbeddings);
        }
        Ok(EmbeddingModel {
            vocab: self.vocab,
            index: self.index,
            dim: self.dim.unwrap_or(0),
            vectors: self.vectors,
            norms: self.norms,
        })
    }
}
