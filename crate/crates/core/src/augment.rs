//! Identity-pair expansion over word-embedding neighbourhoods.
//!
//! For every known pair `(a, b)` the candidate set is the cartesian product
//! of the `top_k1` neighbours of `a` and of `b`. A candidate `(x, y)` is
//! admitted when the Jaccard index of the `top_k2` neighbourhoods of `x` and
//! `y` reaches `tau`.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::hash::Hash;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedding::EmbeddingModel;
use crate::error::{Error, Result};
use crate::lexicon::{IdentityLexicon, IdentityPair, PairSource};
use crate::stem::lemma;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AugmentationConfig {
    /// Admission threshold on the neighbourhood Jaccard index.
    pub tau: f64,
    /// Neighbours per known term used to form candidates.
    pub top_k1: usize,
    /// Neighbourhood size used for the similarity check.
    pub top_k2: usize,
    /// Merge inflectional variants when normalizing the output.
    pub lemmatize: bool,
}

impl Default for AugmentationConfig {
    fn default() -> Self {
        AugmentationConfig {
            tau: 0.25,
            top_k1: 10,
            top_k2: 500,
            lemmatize: true,
        }
    }
}

impl AugmentationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(Error::Config(format!(
                "tau must lie in (0, 1], got {}",
                self.tau
            )));
        }
        if self.top_k1 == 0 || self.top_k2 == 0 {
            return Err(Error::Config("top_k1 and top_k2 must be positive".into()));
        }
        if self.top_k2 < self.top_k1 {
            warn!(
                "top_k2 ({}) is smaller than top_k1 ({})",
                self.top_k2, self.top_k1
            );
        }
        Ok(())
    }
}

/// Jaccard index `|a ∩ b| / |a ∪ b|`; two empty sets score 0.
pub fn jaccard<T: Eq + Hash>(a: &HashSet<T>, b: &HashSet<T>) -> f64 {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let inter = small.iter().filter(|x| large.contains(x)).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct AugmentReport {
    pub known: usize,
    pub skipped_oov: usize,
    pub candidates: usize,
    pub admitted: usize,
}

pub fn augment_pairs(
    model: &EmbeddingModel,
    known: &[IdentityPair],
    cfg: &AugmentationConfig,
) -> Result<IdentityLexicon> {
    augment_pairs_with_report(model, known, cfg).map(|(lex, _)| lex)
}

/// Expand `known` and report how many candidates were examined and admitted.
///
/// The output lists the known pairs first, in their given orientation, then
/// the admitted pairs with `first <= second`, sorted.
pub fn augment_pairs_with_report(
    model: &EmbeddingModel,
    known: &[IdentityPair],
    cfg: &AugmentationConfig,
) -> Result<(IdentityLexicon, AugmentReport)> {
    cfg.validate()?;
    if model.is_empty() {
        return Err(Error::EmptyEmbeddings);
    }
    let seed = IdentityLexicon::from_pairs(known.iter().cloned().map(|mut p| {
        p.source = PairSource::Known;
        p
    }));
    let mut report = AugmentReport {
        known: seed.len(),
        ..Default::default()
    };

    let mut candidates: BTreeSet<(usize, usize)> = BTreeSet::new();
    for pair in seed.pairs() {
        let (Some(a), Some(b)) = (model.lookup(&pair.first), model.lookup(&pair.second)) else {
            warn!(
                "known pair ({}, {}) has an out-of-vocabulary term; not expanded",
                pair.first, pair.second
            );
            report.skipped_oov += 1;
            continue;
        };
        let left = model.top_k_rows(a, cfg.top_k1);
        let right = model.top_k_rows(b, cfg.top_k1);
        for &(x, _) in &left {
            for &(y, _) in &right {
                if x != y {
                    candidates.insert((x.min(y), x.max(y)));
                }
            }
        }
    }
    report.candidates = candidates.len();

    let rows: Vec<usize> = candidates
        .iter()
        .flat_map(|&(x, y)| [x, y])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let neighborhoods: HashMap<usize, HashSet<usize>> = rows
        .par_iter()
        .map(|&r| {
            let set = model
                .top_k_rows(r, cfg.top_k2)
                .into_iter()
                .map(|(n, _)| n)
                .collect();
            (r, set)
        })
        .collect();

    let mut admitted: Vec<IdentityPair> = Vec::new();
    for &(x, y) in &candidates {
        let score = jaccard(&neighborhoods[&x], &neighborhoods[&y]);
        if score >= cfg.tau {
            let pair = IdentityPair {
                first: model.token(x).to_string(),
                second: model.token(y).to_string(),
                source: PairSource::Augmented,
                score: Some(score),
            }
            .canonical();
            admitted.push(pair);
        }
    }
    admitted.sort_by(|p, q| (&p.first, &p.second).cmp(&(&q.first, &q.second)));

    let mut out = seed;
    for pair in admitted {
        if out.insert(pair) {
            report.admitted += 1;
        }
    }
    Ok((out, report))
}

/// Canonical form of a lexicon.
///
/// Drops self-pairs, orients non-known pairs as `first <= second`, and keeps
/// one pair per unordered set, preferring known pairs. Known pairs come
/// first in their given order, the rest sorted. With `lemmatize`, pairs whose
/// lemma forms coincide are merged (keeping the more frequent surface form
/// according to `model` row order) and pairs of two inflections of the same
/// lemma are dropped.
pub fn normalize_lexicon(
    lexicon: &IdentityLexicon,
    lemmatize: bool,
    model: Option<&EmbeddingModel>,
) -> IdentityLexicon {
    let mut known: Vec<IdentityPair> = Vec::new();
    let mut others: Vec<IdentityPair> = Vec::new();
    for p in lexicon.pairs() {
        if p.first == p.second {
            continue;
        }
        if p.source == PairSource::Known {
            known.push(p.clone());
        } else {
            others.push(p.clone().canonical());
        }
    }
    others.sort_by(|p, q| (&p.first, &p.second).cmp(&(&q.first, &q.second)));

    let ordered = known.into_iter().chain(others);
    let mut out = if lemmatize {
        let rank = |t: &str| model.and_then(|m| m.rank(t)).unwrap_or(usize::MAX);
        let pair_rank = |p: &IdentityPair| {
            let (a, b) = (rank(&p.first), rank(&p.second));
            (p.source != PairSource::Known, a.max(b), a.min(b))
        };
        let mut slots: Vec<IdentityPair> = Vec::new();
        let mut by_lemma: HashMap<(String, String), usize> = HashMap::new();
        let mut seen: HashSet<(String, String)> = HashSet::new();
        for p in ordered {
            if !seen.insert(p.key()) {
                continue;
            }
            let (la, lb) = (lemma(&p.first), lemma(&p.second));
            if la == lb {
                continue;
            }
            let key = crate::lexicon::unordered_key(&la, &lb);
            match by_lemma.get(&key) {
                Some(&slot) => {
                    if pair_rank(&p) < pair_rank(&slots[slot]) {
                        slots[slot] = p;
                    }
                }
                None => {
                    by_lemma.insert(key, slots.len());
                    slots.push(p);
                }
            }
        }
        IdentityLexicon::from_pairs(slots)
    } else {
        IdentityLexicon::from_pairs(ordered)
    };
    out.set_placeholders(lexicon.placeholders().clone());
    out
}

/// Analogy-based expansion kept as a diagnostic baseline: for each known
/// `(a, b)` and each of the `top_k` neighbours `a'` of `a`, emit `(a', b')`
/// where `b'` is nearest to `w(b) + w(a') - w(a)`. No similarity filter.
pub fn analogy_augment(
    model: &EmbeddingModel,
    known: &[IdentityPair],
    top_k: usize,
) -> Result<IdentityLexicon> {
    if model.is_empty() {
        return Err(Error::EmptyEmbeddings);
    }
    let mut out = IdentityLexicon::new();
    if top_k == 0 {
        return Ok(out);
    }
    for pair in known {
        if !(model.contains(&pair.first) && model.contains(&pair.second)) {
            warn!(
                "known pair ({}, {}) has an out-of-vocabulary term; skipped",
                pair.first, pair.second
            );
            continue;
        }
        for n in model.top_k_similar(&pair.first, top_k)? {
            let best = model.analogy_neighbors(&pair.first, &pair.second, &n.token, 1)?;
            if let Some(b) = best.into_iter().next() {
                if b.token != n.token {
                    out.insert(IdentityPair {
                        first: n.token.clone(),
                        second: b.token,
                        source: PairSource::AnalogyDiagnostic,
                        score: Some(b.score),
                    });
                }
            }
        }
    }
    Ok(out)
}
