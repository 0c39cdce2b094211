//! Training loop for the four schemes.
//!
//! - `plain`: the dataset as given.
//! - `blindness`: every lexicon term replaced by its placeholder, both for
//!   training and at inference.
//! - `augmentation`: the dataset plus every replacement, blindness and swap
//!   instance generated for it, unweighted.
//! - `logit_pairing`: cross entropy plus the logit-pairing penalties over
//!   each instance's replacement and blindness variants.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::adam::Adam;
use crate::classifier::loss::{loss_and_grad, loss_plain, Example, LossSelector};
use crate::classifier::model::{encode, sigmoid, ModelParams};
use crate::dataset::Instance;
use crate::embedding::EmbeddingModel;
use crate::error::{Error, Result};
use crate::lexicon::IdentityLexicon;
use crate::perturb::{blind_all, perturb_instance, PerturbationConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Plain,
    Blindness,
    Augmentation,
    #[serde(alias = "logit-pairing")]
    LogitPairing,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Plain => "plain",
            Scheme::Blindness => "blindness",
            Scheme::Augmentation => "augmentation",
            Scheme::LogitPairing => "logit_pairing",
        }
    }

    pub fn needs_lexicon(self) -> bool {
        self != Scheme::Plain
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "plain" => Ok(Scheme::Plain),
            "blindness" => Ok(Scheme::Blindness),
            "augmentation" => Ok(Scheme::Augmentation),
            "logit_pairing" => Ok(Scheme::LogitPairing),
            other => Err(Error::Config(format!("unknown scheme `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub scheme: Scheme,
    /// Weight of the replacement-counterfactual penalty (logit pairing only).
    pub lambda1: f64,
    /// Weight of the blindness penalty (logit pairing only).
    pub lambda2: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub hidden: usize,
    pub seed: u64,
    /// Patience in epochs on held-out cross entropy; `None` disables the
    /// holdout split.
    pub early_stopping: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            scheme: Scheme::Plain,
            lambda1: 1.0,
            lambda2: 1.0,
            epochs: 25,
            batch_size: 128,
            learning_rate: 3e-4,
            hidden: 16,
            seed: 0,
            early_stopping: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 || self.hidden == 0 {
            return Err(Error::Config(
                "epochs, batch_size and hidden must be positive".into(),
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.early_stopping == Some(0) {
            return Err(Error::Config(
                "early_stopping patience must be positive".into(),
            ));
        }
        LossSelector::logit_pairing(self.lambda1, self.lambda2)?;
        Ok(())
    }

    fn selector(&self) -> LossSelector {
        match self.scheme {
            Scheme::LogitPairing => LossSelector::LogitPairing {
                lambda1: self.lambda1,
                lambda2: self.lambda2,
            },
            _ => LossSelector::Plain,
        }
    }
}

/// Term → placeholder substitution applied before scoring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Blinding {
    pub terms: BTreeMap<String, String>,
}

impl Blinding {
    pub fn from_lexicon(lexicon: &IdentityLexicon, default: &str) -> Self {
        let terms = lexicon
            .terms()
            .iter()
            .map(|t| (t.clone(), lexicon.placeholder_for(t, default).to_string()))
            .collect();
        Blinding { terms }
    }

    pub fn apply(&self, tokens: &[String]) -> Vec<String> {
        tokens
            .iter()
            .map(|t| self.terms.get(t).unwrap_or(t).clone())
            .collect()
    }
}

/// Trained parameters plus whatever inference-time preprocessing the scheme
/// requires.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub params: ModelParams,
    pub scheme: Scheme,
    pub blinding: Option<Blinding>,
}

impl TrainedModel {
    pub fn features(&self, x: &Instance, embeddings: &EmbeddingModel) -> Vec<f64> {
        match &self.blinding {
            Some(b) => encode(&b.apply(&x.tokens), embeddings),
            None => encode(&x.tokens, embeddings),
        }
    }

    pub fn logit(&self, x: &Instance, embeddings: &EmbeddingModel) -> f64 {
        self.params.logit(&self.features(x, embeddings))
    }

    pub fn probability(&self, x: &Instance, embeddings: &EmbeddingModel) -> f64 {
        sigmoid(self.logit(x, embeddings))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean training objective over the epoch's mini-batches.
    pub loss: f64,
    pub train_accuracy: f64,
    pub holdout_loss: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    pub epochs: Vec<EpochRecord>,
    pub stopped_early: bool,
    /// Epoch whose parameters were kept (the last one unless stopped early).
    pub best_epoch: usize,
}

impl TrainingLog {
    pub fn final_accuracy(&self) -> Option<f64> {
        self.epochs.last().map(|e| e.train_accuracy)
    }

    pub fn to_csv(&self, comment: Option<&str>) -> String {
        let mut out = String::new();
        if let Some(c) = comment {
            out.push_str(&format!("# {c}\n"));
        }
        out.push_str("epoch,loss,train_accuracy,holdout_loss\n");
        for e in &self.epochs {
            let holdout = e.holdout_loss.map(|v| v.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{}\n",
                e.epoch, e.loss, e.train_accuracy, holdout
            ));
        }
        out
    }
}

/// Per-class 10% holdout (at least one instance of a class with two or more
/// members), chosen with `rng`.
fn stratified_split(dataset: &[Instance], rng: &mut ChaCha8Rng) -> (Vec<usize>, Vec<usize>) {
    let mut train = Vec::new();
    let mut holdout = Vec::new();
    for label in [0u8, 1] {
        let mut idx: Vec<usize> = (0..dataset.len())
            .filter(|&i| dataset[i].label == label)
            .collect();
        idx.shuffle(rng);
        let take = if idx.len() >= 2 {
            (idx.len() / 10).max(1)
        } else {
            0
        };
        holdout.extend_from_slice(&idx[..take]);
        train.extend_from_slice(&idx[take..]);
    }
    train.sort_unstable();
    holdout.sort_unstable();
    (train, holdout)
}

fn check_classes(dataset: &[Instance]) -> Result<()> {
    if dataset.is_empty() {
        return Err(Error::Data("training set is empty".into()));
    }
    let pos = dataset.iter().filter(|x| x.label == 1).count();
    if pos == 0 || pos == dataset.len() {
        return Err(Error::Data("training set must contain both classes".into()));
    }
    Ok(())
}

fn build_examples(
    rows: &[&Instance],
    embeddings: &EmbeddingModel,
    lexicon: Option<&IdentityLexicon>,
    cfg: &TrainConfig,
    perturb: &PerturbationConfig,
) -> Vec<Example> {
    let placeholder = perturb.placeholder_default.as_str();
    let per_row: Vec<Vec<Example>> = rows
        .par_iter()
        .map(|&x| match (cfg.scheme, lexicon) {
            (Scheme::Plain, _) | (_, None) => vec![Example::from_instance(x, None, embeddings)],
            (Scheme::Blindness, Some(lex)) => {
                let blinded = blind_all(x, lex, placeholder);
                vec![Example::from_instance(&blinded, None, embeddings)]
            }
            (Scheme::Augmentation, Some(lex)) => {
                let set = perturb_instance(x, lex, perturb);
                std::iter::once(x)
                    .chain(set.instances())
                    .map(|y| Example::from_instance(y, None, embeddings))
                    .collect()
            }
            (Scheme::LogitPairing, Some(lex)) => {
                let set = perturb_instance(x, lex, perturb);
                vec![Example::from_instance(x, Some(&set), embeddings)]
            }
        })
        .collect();
    per_row.into_iter().flatten().collect()
}

fn accuracy(params: &ModelParams, examples: &[Example]) -> f64 {
    let correct = examples
        .iter()
        .filter(|ex| u8::from(params.probability(&ex.features) >= 0.5) == ex.label)
        .count();
    correct as f64 / examples.len() as f64
}

/// Train a classifier under `cfg.scheme`.
pub fn train(
    embeddings: &EmbeddingModel,
    dataset: &[Instance],
    lexicon: Option<&IdentityLexicon>,
    cfg: &TrainConfig,
    perturb: &PerturbationConfig,
) -> Result<(TrainedModel, TrainingLog)> {
    cfg.validate()?;
    perturb.validate()?;
    check_classes(dataset)?;
    if cfg.scheme.needs_lexicon() && lexicon.is_none() {
        return Err(Error::Config(format!(
            "scheme `{}` requires an identity lexicon",
            cfg.scheme
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut params = ModelParams::init(embeddings.dim(), cfg.hidden, &mut rng);
    let (train_idx, holdout_idx) = match cfg.early_stopping {
        Some(_) => stratified_split(dataset, &mut rng),
        None => ((0..dataset.len()).collect(), Vec::new()),
    };

    let blinding = match (cfg.scheme, lexicon) {
        (Scheme::Blindness, Some(lex)) => {
            Some(Blinding::from_lexicon(lex, &perturb.placeholder_default))
        }
        _ => None,
    };
    let train_rows: Vec<&Instance> = train_idx.iter().map(|&i| &dataset[i]).collect();
    let examples = build_examples(&train_rows, embeddings, lexicon, cfg, perturb);
    let holdout: Vec<Example> = holdout_idx
        .iter()
        .map(|&i| {
            let x = &dataset[i];
            let features = match &blinding {
                Some(b) => encode(&b.apply(&x.tokens), embeddings),
                None => encode(&x.tokens, embeddings),
            };
            Example::new(features, x.label)
        })
        .collect();
    let holdout_refs: Vec<&Example> = holdout.iter().collect();

    let selector = cfg.selector();
    let mut adam = Adam::new(params.num_params(), cfg.learning_rate);
    let mut flat = params.to_flat();
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut log = TrainingLog::default();
    let mut best: Option<(f64, ModelParams, usize)> = None;
    let mut stale = 0usize;

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<&Example> = chunk.iter().map(|&i| &examples[i]).collect();
            let (value, grad) = loss_and_grad(&params, &batch, selector);
            if !value.is_finite() {
                return Err(Error::Divergence { epoch });
            }
            total += value * chunk.len() as f64;
            adam.step(&mut flat, &grad.to_flat());
            params.set_flat(&flat);
            if !params.is_finite() {
                return Err(Error::Divergence { epoch });
            }
        }
        let holdout_loss = (!holdout_refs.is_empty()).then(|| loss_plain(&params, &holdout_refs));
        log.epochs.push(EpochRecord {
            epoch,
            loss: total / examples.len() as f64,
            train_accuracy: accuracy(&params, &examples),
            holdout_loss,
        });
        log.best_epoch = epoch;

        if let (Some(patience), Some(h)) = (cfg.early_stopping, holdout_loss) {
            if !h.is_finite() {
                return Err(Error::Divergence { epoch });
            }
            match &best {
                Some((b, _, _)) if h >= *b => stale += 1,
                _ => {
                    best = Some((h, params.clone(), epoch));
                    stale = 0;
                }
            }
            if stale >= patience {
                log.stopped_early = true;
                break;
            }
        }
    }
    if let Some((_, p, epoch)) = best {
        params = p;
        log.best_epoch = epoch;
    }

    Ok((
        TrainedModel {
            params,
            scheme: cfg.scheme,
            blinding,
        },
        log,
    ))
}
