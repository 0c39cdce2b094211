//! Identity perturbations of text instances.
//!
//! Three operator families are generated from an identity lexicon:
//! replacement (a counterfactual per applicable pair orientation), blindness
//! (a sampled term replaced by its placeholder) and swap (both members of a
//! pair exchanged at once). Sampling is seeded per instance from
//! `(seed, instance id)`, so results do not depend on processing order.
//! Substitution is exact token matching; a perturbation that would not change
//! the instance is not emitted.

use std::collections::{BTreeSet, HashMap, HashSet};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::{csv_err, Instance};
use crate::error::{Error, Result};
use crate::lexicon::{IdentityLexicon, IdentityPair};
use crate::text::is_placeholder;

pub const DEFAULT_PLACEHOLDER: &str = "IDENTITY_TOKEN";
pub const DEFAULT_CAP: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PerturbationConfig {
    /// Fraction of lexicon pairs sampled for replacement.
    pub n_r: f64,
    /// Fraction of lexicon terms sampled for blindness.
    pub n_b: f64,
    /// Fraction of lexicon pairs sampled for swap.
    pub n_s: f64,
    pub seed: u64,
    pub placeholder_default: String,
    /// Upper bound on evaluation counterfactuals per instance.
    pub cap: usize,
}

impl Default for PerturbationConfig {
    fn default() -> Self {
        Self::hate_speech()
    }
}

impl PerturbationConfig {
    /// Fractions used for the balanced hate-speech task.
    pub fn hate_speech() -> Self {
        PerturbationConfig {
            n_r: 0.5,
            n_b: 0.1,
            n_s: 0.1,
            seed: 0,
            placeholder_default: DEFAULT_PLACEHOLDER.to_string(),
            cap: DEFAULT_CAP,
        }
    }

    /// Fractions used for the toxic-comment task.
    pub fn toxic_comments() -> Self {
        PerturbationConfig {
            n_r: 0.1,
            ..Self::hate_speech()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("n_r", self.n_r), ("n_b", self.n_b), ("n_s", self.n_s)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        if !is_placeholder(&self.placeholder_default) {
            return Err(Error::Config(format!(
                "placeholder `{}` must look like UPPER_CASE_TOKEN",
                self.placeholder_default
            )));
        }
        if self.cap == 0 {
            return Err(Error::Config("cap must be positive".into()));
        }
        Ok(())
    }
}

/// Number of items to sample for a fraction: the ceiling of
/// `fraction * len`, ignoring floating-point noise below 1e-9.
pub fn sample_count(fraction: f64, len: usize) -> usize {
    if fraction <= 0.0 || len == 0 {
        return 0;
    }
    let raw = (fraction * len as f64 - 1e-9).ceil();
    (raw.max(1.0) as usize).min(len)
}

/// Generator for one instance, derived from the run seed and instance id.
pub fn instance_rng(seed: u64, id: &str) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(id.as_bytes());
    ChaCha8Rng::from_seed(h.finalize().into())
}

fn sample_indices<R: Rng + ?Sized>(rng: &mut R, len: usize, fraction: f64) -> Vec<usize> {
    let amount = sample_count(fraction, len);
    if amount == 0 {
        return Vec::new();
    }
    let mut idx = index::sample(rng, len, amount).into_vec();
    idx.sort_unstable();
    idx
}

fn map_tokens(x: &Instance, id: String, f: impl Fn(&str) -> Option<String>) -> Option<Instance> {
    let mut changed = false;
    let tokens = x
        .tokens
        .iter()
        .map(|t| match f(t) {
            Some(new) => {
                changed = true;
                new
            }
            None => t.clone(),
        })
        .collect();
    changed.then(|| Instance::from_tokens(id, tokens, x.label))
}

/// Replace every occurrence of `from` with `to`; `None` when `from` is absent.
pub fn replace_term(x: &Instance, from: &str, to: &str) -> Option<Instance> {
    let id = format!("{}:ipr:{from}>{to}", x.id);
    map_tokens(x, id, |t| (t == from).then(|| to.to_string()))
}

/// Replace `pair.first` with `pair.second` throughout.
pub fn replace_pair(x: &Instance, pair: &IdentityPair) -> Option<Instance> {
    replace_term(x, &pair.first, &pair.second)
}

/// Exchange the two members of `pair` simultaneously; `None` when neither
/// occurs.
pub fn swap_pair(x: &Instance, pair: &IdentityPair) -> Option<Instance> {
    let id = format!("{}:ips:{}<>{}", x.id, pair.first, pair.second);
    map_tokens(x, id, |t| {
        if t == pair.first {
            Some(pair.second.clone())
        } else if t == pair.second {
            Some(pair.first.clone())
        } else {
            None
        }
    })
}

/// Replace every occurrence of `term` with `placeholder`.
pub fn blind_term(x: &Instance, term: &str, placeholder: &str) -> Option<Instance> {
    let id = format!("{}:itb:{term}", x.id);
    map_tokens(x, id, |t| (t == term).then(|| placeholder.to_string()))
}

/// Blind every lexicon term at once. Always returns an instance (a copy
/// when nothing matched).
pub fn blind_all(x: &Instance, lexicon: &IdentityLexicon, default: &str) -> Instance {
    let tokens = x
        .tokens
        .iter()
        .map(|t| {
            if lexicon.is_term(t) {
                lexicon.placeholder_for(t, default).to_string()
            } else {
                t.clone()
            }
        })
        .collect();
    Instance::from_tokens(x.id.clone(), tokens, x.label)
}

fn reversed(pair: &IdentityPair) -> IdentityPair {
    IdentityPair {
        first: pair.second.clone(),
        second: pair.first.clone(),
        source: pair.source,
        score: pair.score,
    }
}

/// Replacement counterfactuals: sample `ceil(n_r * |pairs|)` pairs and apply
/// each in both orientations where it applies. The returned pair is oriented
/// as applied (`first` replaced by `second`).
pub fn generate_ipr<R: Rng + ?Sized>(
    x: &Instance,
    lexicon: &IdentityLexicon,
    cfg: &PerturbationConfig,
    rng: &mut R,
) -> Vec<(IdentityPair, Instance)> {
    let pairs = lexicon.pairs();
    let mut out = Vec::new();
    for i in sample_indices(rng, pairs.len(), cfg.n_r) {
        for oriented in [pairs[i].clone(), reversed(&pairs[i])] {
            if let Some(y) = replace_pair(x, &oriented) {
                out.push((oriented, y));
            }
        }
    }
    out
}

/// Blindness instances: sample `ceil(n_b * |terms|)` terms and blind each one
/// that occurs.
pub fn generate_itb<R: Rng + ?Sized>(
    x: &Instance,
    lexicon: &IdentityLexicon,
    cfg: &PerturbationConfig,
    rng: &mut R,
) -> Vec<(String, Instance)> {
    let terms: Vec<&String> = lexicon.terms().iter().collect();
    sample_indices(rng, terms.len(), cfg.n_b)
        .into_iter()
        .filter_map(|i| {
            let term = terms[i];
            let ph = lexicon.placeholder_for(term, &cfg.placeholder_default);
            blind_term(x, term, ph).map(|y| (term.clone(), y))
        })
        .collect()
}

/// Swap instances: sample `ceil(n_s * |pairs|)` pairs and swap each one with
/// at least one member present.
pub fn generate_ips<R: Rng + ?Sized>(
    x: &Instance,
    lexicon: &IdentityLexicon,
    cfg: &PerturbationConfig,
    rng: &mut R,
) -> Vec<(IdentityPair, Instance)> {
    let pairs = lexicon.pairs();
    sample_indices(rng, pairs.len(), cfg.n_s)
        .into_iter()
        .filter_map(|i| swap_pair(x, &pairs[i]).map(|y| (pairs[i].clone(), y)))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationSet {
    pub origin: String,
    pub replacements: Vec<(IdentityPair, Instance)>,
    pub blinded: Vec<(String, Instance)>,
    pub swapped: Vec<(IdentityPair, Instance)>,
}

impl PerturbationSet {
    pub fn len(&self) -> usize {
        self.replacements.len() + self.blinded.len() + self.swapped.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All derived instances: replacements, then blinded, then swapped.
    pub fn instances(&self) -> impl Iterator<Item = &Instance> {
        self.replacements
            .iter()
            .map(|(_, x)| x)
            .chain(self.blinded.iter().map(|(_, x)| x))
            .chain(self.swapped.iter().map(|(_, x)| x))
    }
}

/// All three families for one instance, drawn from its own generator in the
/// order replacement, blindness, swap.
pub fn perturb_instance(
    x: &Instance,
    lexicon: &IdentityLexicon,
    cfg: &PerturbationConfig,
) -> PerturbationSet {
    let mut rng = instance_rng(cfg.seed, &x.id);
    let replacements = generate_ipr(x, lexicon, cfg, &mut rng);
    let blinded = generate_itb(x, lexicon, cfg, &mut rng);
    let swapped = generate_ips(x, lexicon, cfg, &mut rng);
    PerturbationSet {
        origin: x.id.clone(),
        replacements,
        blinded,
        swapped,
    }
}

pub fn perturb_dataset(
    xs: &[Instance],
    lexicon: &IdentityLexicon,
    cfg: &PerturbationConfig,
) -> Vec<PerturbationSet> {
    xs.par_iter()
        .map(|x| perturb_instance(x, lexicon, cfg))
        .collect()
}

/// Every counterfactual reachable by substituting identity terms of `x` with
/// lexicon partners, singly or in combination, in lexicographic order of the
/// applied `(term, replacement)` lists and truncated at `cap`.
pub fn counterfactuals_all(x: &Instance, lexicon: &IdentityLexicon, cap: usize) -> Vec<Instance> {
    let present: BTreeSet<&str> = x
        .tokens
        .iter()
        .map(String::as_str)
        .filter(|t| lexicon.is_term(t))
        .collect();
    let options: Vec<(&str, Vec<&str>)> = present
        .into_iter()
        .map(|t| (t, lexicon.partners(t)))
        .filter(|(_, p)| !p.is_empty())
        .collect();

    let mut search = CounterfactualSearch {
        x,
        options: &options,
        cap,
        seen: HashSet::new(),
        out: Vec::new(),
        assignment: Vec::new(),
    };
    if cap > 0 {
        search.descend(0);
    }
    search.out
}

struct CounterfactualSearch<'a> {
    x: &'a Instance,
    options: &'a [(&'a str, Vec<&'a str>)],
    cap: usize,
    seen: HashSet<Vec<String>>,
    out: Vec<Instance>,
    assignment: Vec<(&'a str, &'a str)>,
}

impl<'a> CounterfactualSearch<'a> {
    /// Pre-order walk: each assignment is emitted before its extensions,
    /// which is lexicographic order over the sorted option lists.
    fn descend(&mut self, start: usize) -> bool {
        for i in start..self.options.len() {
            let (term, partners) = (&self.options[i].0, &self.options[i].1);
            for &partner in partners {
                self.assignment.push((term, partner));
                self.emit();
                if self.out.len() >= self.cap || self.descend(i + 1) {
                    return true;
                }
                self.assignment.pop();
            }
        }
        false
    }

    fn emit(&mut self) {
        let map: HashMap<&str, &str> = self.assignment.iter().copied().collect();
        let tokens: Vec<String> = self
            .x
            .tokens
            .iter()
            .map(|t| {
                map.get(t.as_str())
                    .map_or_else(|| t.clone(), |s| s.to_string())
            })
            .collect();
        if self.seen.insert(tokens.clone()) {
            let detail: Vec<String> = self
                .assignment
                .iter()
                .map(|(a, b)| format!("{a}>{b}"))
                .collect();
            let id = format!("{}:cf:{}", self.x.id, detail.join("+"));
            self.out
                .push(Instance::from_tokens(id, tokens, self.x.label));
        }
    }
}

/// Per-operator counts of a perturbed corpus.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PerturbSummary {
    pub origin: usize,
    pub ipr: usize,
    pub itb: usize,
    pub ips: usize,
}

/// Perturbed-corpus CSV: header `id,text,label,origin_id,op,detail`, each
/// origin row followed by its derived rows.
pub fn perturbed_corpus_csv(
    xs: &[Instance],
    sets: &[PerturbationSet],
    cfg: &PerturbationConfig,
    lexicon: &IdentityLexicon,
    header_comment: Option<&str>,
) -> Result<(Vec<u8>, PerturbSummary)> {
    let mut buf = Vec::new();
    if let Some(c) = header_comment {
        buf.extend_from_slice(format!("# {c}\n").as_bytes());
    }
    let mut w = csv::Writer::from_writer(buf);
    w.write_record(["id", "text", "label", "origin_id", "op", "detail"])
        .map_err(csv_err)?;
    let mut summary = PerturbSummary::default();
    for (x, set) in xs.iter().zip(sets) {
        let label = x.label.to_string();
        w.write_record([&x.id, &x.text, &label, &x.id, "origin", ""])
            .map_err(csv_err)?;
        summary.origin += 1;
        for (pair, y) in &set.replacements {
            let detail = format!("{}>{}", pair.first, pair.second);
            w.write_record([&y.id, &y.text, &label, &x.id, "ipr", &detail])
                .map_err(csv_err)?;
            summary.ipr += 1;
        }
        for (term, y) in &set.blinded {
            let detail = format!(
                "{term}>{}",
                lexicon.placeholder_for(term, &cfg.placeholder_default)
            );
            w.write_record([&y.id, &y.text, &label, &x.id, "itb", &detail])
                .map_err(csv_err)?;
            summary.itb += 1;
        }
        for (pair, y) in &set.swapped {
            let detail = format!("{}<>{}", pair.first, pair.second);
            w.write_record([&y.id, &y.text, &label, &x.id, "ips", &detail])
                .map_err(csv_err)?;
            summary.ips += 1;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Data(e.to_string()))?;
    Ok((bytes, summary))
}
