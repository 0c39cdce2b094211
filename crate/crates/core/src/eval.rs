//! Counterfactual token fairness gap, per-class accuracy and AUC.
//!
//! The CTF gap of an instance is the mean `|f(x) - f(x')|` over its
//! counterfactuals. Instances without counterfactuals are excluded from the
//! dataset means and counted separately. `ctf_all` is the mean over all
//! counted instances, not the mean of the two class means. Sums are taken
//! over sorted values so results do not depend on test-set order.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::classifier::TrainedModel;
use crate::dataset::Instance;
use crate::embedding::EmbeddingModel;
use crate::error::{Error, Result};
use crate::lexicon::IdentityLexicon;
use crate::perturb::counterfactuals_all;

/// Anything that maps an instance to a probability of the positive class.
pub trait Scorer: Sync {
    fn probability(&self, x: &Instance) -> f64;
}

impl<F> Scorer for F
where
    F: Fn(&Instance) -> f64 + Sync,
{
    fn probability(&self, x: &Instance) -> f64 {
        self(x)
    }
}

/// A trained model bound to the embeddings it was trained on.
pub struct ModelScorer<'a> {
    pub model: &'a TrainedModel,
    pub embeddings: &'a EmbeddingModel,
}

impl Scorer for ModelScorer<'_> {
    fn probability(&self, x: &Instance) -> f64 {
        self.model.probability(x, self.embeddings)
    }
}

fn sorted_sum(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    values.iter().sum()
}

/// Mean absolute score change over `counterfactuals`; `None` when the list
/// is empty.
pub fn ctf_gap_instance<S: Scorer + ?Sized>(
    scorer: &S,
    x: &Instance,
    counterfactuals: &[Instance],
) -> Option<f64> {
    if counterfactuals.is_empty() {
        return None;
    }
    let base = scorer.probability(x);
    let total: f64 = counterfactuals
        .iter()
        .map(|c| (base - scorer.probability(c)).abs())
        .sum();
    Some(total / counterfactuals.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CtfGaps {
    pub ctf_pos: Option<f64>,
    pub ctf_neg: Option<f64>,
    pub ctf_all: f64,
    pub counted_pos: usize,
    pub counted_neg: usize,
    pub skipped: usize,
}

/// Aggregate per-instance gaps `(label, gap)`; `None` gaps are skipped.
pub fn aggregate_gaps(gaps: &[(u8, Option<f64>)]) -> Result<CtfGaps> {
    let mut pos: Vec<f64> = gaps
        .iter()
        .filter_map(|&(y, g)| g.filter(|_| y == 1))
        .collect();
    let mut neg: Vec<f64> = gaps
        .iter()
        .filter_map(|&(y, g)| g.filter(|_| y != 1))
        .collect();
    let skipped = gaps.iter().filter(|(_, g)| g.is_none()).count();
    let (np, nn) = (pos.len(), neg.len());
    if np + nn == 0 {
        return Err(Error::NoEvaluableInstances);
    }
    let mut all: Vec<f64> = pos.iter().chain(&neg).copied().collect();
    let ctf_all = sorted_sum(&mut all) / (np + nn) as f64;
    let mean = |v: &mut Vec<f64>| (!v.is_empty()).then(|| sorted_sum(v) / v.len() as f64);
    Ok(CtfGaps {
        ctf_pos: mean(&mut pos),
        ctf_neg: mean(&mut neg),
        ctf_all,
        counted_pos: np,
        counted_neg: nn,
        skipped,
    })
}

/// Per-instance gaps over the test set, with counterfactuals from
/// [`counterfactuals_all`].
pub fn instance_gaps<S: Scorer + ?Sized>(
    scorer: &S,
    testset: &[Instance],
    lexicon: &IdentityLexicon,
    cap: usize,
) -> Vec<(u8, Option<f64>)> {
    testset
        .par_iter()
        .map(|x| {
            let cfs = counterfactuals_all(x, lexicon, cap);
            (x.label, ctf_gap_instance(scorer, x, &cfs))
        })
        .collect()
}

pub fn ctf_gap_dataset<S: Scorer + ?Sized>(
    scorer: &S,
    testset: &[Instance],
    lexicon: &IdentityLexicon,
    cap: usize,
) -> Result<CtfGaps> {
    if testset.is_empty() {
        return Err(Error::Data("test set is empty".into()));
    }
    aggregate_gaps(&instance_gaps(scorer, testset, lexicon, cap))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Accuracy {
    /// Recall on positives; `None` when the class is absent.
    pub acc_pos: Option<f64>,
    pub acc_neg: Option<f64>,
    pub acc_all: f64,
}

/// Accuracy of `prediction = score >= threshold` over `(label, score)`.
pub fn accuracy_from_scores(scores: &[(u8, f64)], threshold: f64) -> Result<Accuracy> {
    if scores.is_empty() {
        return Err(Error::Data("test set is empty".into()));
    }
    let hit = |&(y, s): &(u8, f64)| u8::from(s >= threshold) == y;
    let rate = |label: u8| {
        let class: Vec<_> = scores.iter().filter(|(y, _)| *y == label).collect();
        (!class.is_empty())
            .then(|| class.iter().filter(|s| hit(s)).count() as f64 / class.len() as f64)
    };
    Ok(Accuracy {
        acc_pos: rate(1),
        acc_neg: rate(0),
        acc_all: scores.iter().filter(|s| hit(s)).count() as f64 / scores.len() as f64,
    })
}

pub fn accuracy<S: Scorer + ?Sized>(
    scorer: &S,
    testset: &[Instance],
    threshold: f64,
) -> Result<Accuracy> {
    accuracy_from_scores(&scores(scorer, testset), threshold)
}

/// Mann–Whitney AUC with midranks: probability that a random positive
/// outscores a random negative, ties counting one half.
pub fn auc_from_scores(scores: &[(u8, f64)]) -> Result<f64> {
    let n_pos = scores.iter().filter(|(y, _)| *y == 1).count();
    let n_neg = scores.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::Data("AUC needs both classes in the test set".into()));
    }
    let mut sorted: Vec<(f64, u8)> = scores.iter().map(|&(y, s)| (s, y)).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1].0 == sorted[i].0 {
            j += 1;
        }
        // ranks i+1 ..= j+1 share their mean
        let midrank = (i + j + 2) as f64 / 2.0;
        let pos_in_group = sorted[i..=j].iter().filter(|(_, y)| *y == 1).count();
        rank_sum_pos += midrank * pos_in_group as f64;
        i = j + 1;
    }
    let (np, nn) = (n_pos as f64, n_neg as f64);
    let u = rank_sum_pos - np * (np + 1.0) / 2.0;
    Ok(u / (np * nn))
}

pub fn auc<S: Scorer + ?Sized>(scorer: &S, testset: &[Instance]) -> Result<f64> {
    auc_from_scores(&scores(scorer, testset))
}

fn scores<S: Scorer + ?Sized>(scorer: &S, testset: &[Instance]) -> Vec<(u8, f64)> {
    testset
        .par_iter()
        .map(|x| (x.label, scorer.probability(x)))
        .collect()
}

/// Provenance strings stamped into a report.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Provenance {
    pub config_hash: String,
    pub lexicon_hash: String,
    pub seed: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CtfReport {
    pub ctf_pos: Option<f64>,
    pub ctf_neg: Option<f64>,
    pub ctf_all: f64,
    pub acc_pos: Option<f64>,
    pub acc_neg: Option<f64>,
    pub acc_all: f64,
    pub auc: f64,
    pub counted_pos: usize,
    pub counted_neg: usize,
    pub skipped_no_counterfactual: usize,
    pub provenance: Provenance,
}

/// Full report: CTF gaps, accuracy at `threshold`, and AUC.
pub fn evaluate<S: Scorer + ?Sized>(
    scorer: &S,
    testset: &[Instance],
    lexicon: &IdentityLexicon,
    cap: usize,
    threshold: f64,
    provenance: Provenance,
) -> Result<CtfReport> {
    let gaps = ctf_gap_dataset(scorer, testset, lexicon, cap)?;
    let s = scores(scorer, testset);
    let acc = accuracy_from_scores(&s, threshold)?;
    let auc = auc_from_scores(&s)?;
    Ok(CtfReport {
        ctf_pos: gaps.ctf_pos,
        ctf_neg: gaps.ctf_neg,
        ctf_all: gaps.ctf_all,
        acc_pos: acc.acc_pos,
        acc_neg: acc.acc_neg,
        acc_all: acc.acc_all,
        auc,
        counted_pos: gaps.counted_pos,
        counted_neg: gaps.counted_neg,
        skipped_no_counterfactual: gaps.skipped,
        provenance,
    })
}

fn num(v: Option<f64>) -> String {
    v.map_or_else(|| "null".to_string(), |v| format!("{v:.6}"))
}

fn quoted(s: &str) -> String {
    serde_json::to_string(s).expect("string serializes")
}

impl CtfReport {
    /// JSON object with fixed key order and six-decimal numbers.
    pub fn to_json(&self) -> String {
        let fields = [
            ("ctf_pos", num(self.ctf_pos)),
            ("ctf_neg", num(self.ctf_neg)),
            ("ctf_all", num(Some(self.ctf_all))),
            ("acc_pos", num(self.acc_pos)),
            ("acc_neg", num(self.acc_neg)),
            ("acc_all", num(Some(self.acc_all))),
            ("auc", num(Some(self.auc))),
            (
                "counted_instances",
                format!(
                    "{{\"pos\": {}, \"neg\": {}}}",
                    self.counted_pos, self.counted_neg
                ),
            ),
            (
                "skipped_no_counterfactual",
                self.skipped_no_counterfactual.to_string(),
            ),
            ("config_hash", quoted(&self.provenance.config_hash)),
            ("lexicon_hash", quoted(&self.provenance.lexicon_hash)),
            ("seed", quoted(&self.provenance.seed)),
        ];
        let mut out = String::from("{\n");
        for (i, (k, v)) in fields.iter().enumerate() {
            let comma = if i + 1 < fields.len() { "," } else { "" };
            let _ = writeln!(out, "  \"{k}\": {v}{comma}");
        }
        out.push_str("}\n");
        out
    }

    /// Plain-text table in the layout of accuracy / CTF result tables.
    pub fn summary_table(&self, label: &str) -> String {
        let cell = |v: Option<f64>| v.map_or_else(|| "   n/a".to_string(), |v| format!("{v:.4}"));
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<28} {:>7} {:>7} {:>7} {:>7} | {:>7} {:>7} {:>7}",
            "model", "Acc_pos", "Acc_neg", "Acc_all", "AUC", "CTF_pos", "CTF_neg", "CTF_all"
        );
        let _ = writeln!(
            out,
            "{:<28} {:>7} {:>7} {:>7} {:>7} | {:>7} {:>7} {:>7}",
            label,
            cell(self.acc_pos),
            cell(self.acc_neg),
            cell(Some(self.acc_all)),
            cell(Some(self.auc)),
            cell(self.ctf_pos),
            cell(self.ctf_neg),
            cell(Some(self.ctf_all)),
        );
        let _ = writeln!(
            out,
            "counted: {} pos / {} neg, skipped (no counterfactual): {}",
            self.counted_pos, self.counted_neg, self.skipped_no_counterfactual
        );
        out
    }
}
