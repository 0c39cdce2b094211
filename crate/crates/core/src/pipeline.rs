//! File-level stages behind the CLI.
//!
//! Each stage reads its inputs from a [`RunConfig`], computes in memory, and
//! returns the artifact bytes alongside the structured result. The CLI only
//! writes those bytes, so its outputs are identical to calling these
//! functions directly.

use std::path::{Path, PathBuf};

use log::{info, warn};

use crate::augment::{augment_pairs_with_report, normalize_lexicon, AugmentReport};
use crate::classifier::{train as fit, Checkpoint, TrainedModel, TrainingLog};
use crate::config::{
    required, RunConfig, CHECKPOINT_FILE, LEXICON_FILE, PERTURBED_FILE, REPORT_FILE,
    TRAINING_LOG_FILE,
};
use crate::dataset::{read_csv, Instance};
use crate::embedding::EmbeddingModel;
use crate::error::{Error, Result};
use crate::eval::{evaluate as eval_report, CtfReport, ModelScorer, Provenance};
use crate::io::write_atomic;
use crate::lexicon::{read_placeholder_tsv, IdentityLexicon};
use crate::perturb::{perturb_dataset, perturbed_corpus_csv, PerturbSummary};

/// Decision threshold on the positive-class probability.
pub const THRESHOLD: f64 = 0.5;

pub fn load_embeddings(cfg: &RunConfig) -> Result<EmbeddingModel> {
    let path = required("embeddings", &cfg.paths.embeddings)?;
    let model = EmbeddingModel::load_limited(path, cfg.embedding_dim, cfg.max_words)?;
    info!(
        "loaded {} vectors of dimension {}",
        model.len(),
        model.dim()
    );
    Ok(model)
}

/// The lexicon at [`RunConfig::lexicon_path`], with placeholders attached
/// when configured.
pub fn load_lexicon(cfg: &RunConfig) -> Result<IdentityLexicon> {
    let mut lexicon = IdentityLexicon::read_tsv(cfg.lexicon_path())?;
    if let Some(p) = &cfg.paths.placeholders {
        lexicon.set_placeholders(read_placeholder_tsv(p)?);
    }
    Ok(lexicon)
}

fn load_dataset(field: &str, path: &Option<PathBuf>) -> Result<Vec<Instance>> {
    let data = read_csv(required(field, path)?)?;
    if data.is_empty() {
        return Err(Error::Data(format!("{field} has no rows")));
    }
    Ok(data)
}

fn stamp(cfg: &RunConfig, lexicon_hash: Option<&str>) -> String {
    match lexicon_hash {
        Some(h) => format!("config_hash={} lexicon_hash={h}", cfg.config_hash()),
        None => format!("config_hash={}", cfg.config_hash()),
    }
}

#[derive(Debug, Clone)]
pub struct AugmentOutput {
    pub lexicon: IdentityLexicon,
    pub report: AugmentReport,
    pub tsv: Vec<u8>,
}

impl AugmentOutput {
    pub fn write(&self, out_dir: &Path) -> Result<PathBuf> {
        let path = out_dir.join(LEXICON_FILE);
        write_atomic(&path, &self.tsv)?;
        Ok(path)
    }
}

/// Expand the known pairs and normalize the result into a lexicon TSV.
pub fn augment(cfg: &RunConfig) -> Result<AugmentOutput> {
    let cfg = cfg.resolved();
    cfg.augmentation.validate()?;
    let known = IdentityLexicon::read_tsv(required("known_pairs", &cfg.paths.known_pairs)?)?;
    if known.is_empty() {
        return Err(Error::Data("the known-pairs file lists no pairs".into()));
    }
    let embeddings = load_embeddings(&cfg)?;
    let (raw, report) = augment_pairs_with_report(&embeddings, known.pairs(), &cfg.augmentation)?;
    if report.skipped_oov == report.known {
        return Err(Error::Data(
            "every known pair has a term outside the embedding vocabulary".into(),
        ));
    }
    let mut lexicon = normalize_lexicon(&raw, cfg.augmentation.lemmatize, Some(&embeddings));
    if let Some(p) = &cfg.paths.placeholders {
        lexicon.set_placeholders(read_placeholder_tsv(p)?);
    }
    let mut tsv = format!("# {}\n", stamp(&cfg, None)).into_bytes();
    tsv.extend_from_slice(lexicon.to_tsv().as_bytes());
    Ok(AugmentOutput {
        lexicon,
        report,
        tsv,
    })
}

#[derive(Debug, Clone)]
pub struct PerturbOutput {
    pub summary: PerturbSummary,
    pub csv: Vec<u8>,
}

impl PerturbOutput {
    pub fn write(&self, out_dir: &Path) -> Result<PathBuf> {
        let path = out_dir.join(PERTURBED_FILE);
        write_atomic(&path, &self.csv)?;
        Ok(path)
    }
}

/// Perturb the training dataset with the lexicon.
pub fn perturb(cfg: &RunConfig) -> Result<PerturbOutput> {
    let cfg = cfg.resolved();
    cfg.perturbation.validate()?;
    let data = load_dataset("dataset", &cfg.paths.dataset)?;
    let lexicon = load_lexicon(&cfg)?;
    let sets = perturb_dataset(&data, &lexicon, &cfg.perturbation);
    let comment = stamp(&cfg, Some(&lexicon.content_hash()));
    let (csv, summary) =
        perturbed_corpus_csv(&data, &sets, &cfg.perturbation, &lexicon, Some(&comment))?;
    Ok(PerturbOutput { summary, csv })
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub model: TrainedModel,
    pub log: TrainingLog,
    pub checkpoint: Checkpoint,
    pub checkpoint_json: String,
    pub log_csv: String,
}

impl TrainOutput {
    /// Write the checkpoint and the training log; returns their paths.
    pub fn write(&self, out_dir: &Path) -> Result<(PathBuf, PathBuf)> {
        let ck = out_dir.join(CHECKPOINT_FILE);
        let log = out_dir.join(TRAINING_LOG_FILE);
        write_atomic(&ck, self.checkpoint_json.as_bytes())?;
        write_atomic(&log, self.log_csv.as_bytes())?;
        Ok((ck, log))
    }
}

/// Train under `cfg.train.scheme`. The lexicon is read only when the scheme
/// uses it.
pub fn train(cfg: &RunConfig) -> Result<TrainOutput> {
    let cfg = cfg.resolved();
    cfg.validate()?;
    let data = load_dataset("dataset", &cfg.paths.dataset)?;
    let lexicon = if cfg.train.scheme.needs_lexicon() {
        if cfg.paths.lexicon.is_none() && !cfg.lexicon_path().exists() {
            return Err(Error::Config(format!(
                "scheme `{}` requires an identity lexicon; run augment-pairs or set the lexicon path",
                cfg.train.scheme
            )));
        }
        Some(load_lexicon(&cfg)?)
    } else {
        None
    };
    let embeddings = load_embeddings(&cfg)?;
    let (model, log) = fit(
        &embeddings,
        &data,
        lexicon.as_ref(),
        &cfg.train,
        &cfg.perturbation,
    )?;
    let lexicon_hash = lexicon.as_ref().map(IdentityLexicon::content_hash);
    let checkpoint = Checkpoint::new(
        &model,
        cfg.train.seed,
        cfg.config_hash(),
        lexicon_hash.clone(),
    );
    let log_csv = log.to_csv(Some(&stamp(&cfg, lexicon_hash.as_deref())));
    Ok(TrainOutput {
        checkpoint_json: checkpoint.to_json(),
        model,
        log,
        checkpoint,
        log_csv,
    })
}

#[derive(Debug, Clone)]
pub struct EvaluateOutput {
    pub report: CtfReport,
    pub json: String,
}

impl EvaluateOutput {
    pub fn write(&self, out_dir: &Path) -> Result<PathBuf> {
        let path = out_dir.join(REPORT_FILE);
        write_atomic(&path, self.json.as_bytes())?;
        Ok(path)
    }
}

/// Score the test set with the checkpoint. A checkpoint trained against a
/// different lexicon is refused unless `force` is set.
pub fn evaluate(cfg: &RunConfig, force: bool) -> Result<EvaluateOutput> {
    let cfg = cfg.resolved();
    cfg.perturbation.validate()?;
    let checkpoint = Checkpoint::read(cfg.checkpoint_path())?;
    let testset = load_dataset("testset", &cfg.paths.testset)?;
    let lexicon = load_lexicon(&cfg)?;
    let lexicon_hash = lexicon.content_hash();
    if let Some(expected) = &checkpoint.lexicon_hash {
        if *expected != lexicon_hash {
            let err = Error::HashMismatch {
                what: "lexicon",
                expected: expected.clone(),
                found: lexicon_hash.clone(),
            };
            if !force {
                return Err(err);
            }
            warn!("{err}; continuing because of --force");
        }
    }
    if checkpoint.config_hash != cfg.config_hash() {
        info!(
            "checkpoint was produced by config {}",
            checkpoint.config_hash
        );
    }
    let embeddings = load_embeddings(&cfg)?;
    if checkpoint.params.input_dim != embeddings.dim() {
        return Err(Error::Data(format!(
            "checkpoint expects {}-dimensional embeddings, file has {}",
            checkpoint.params.input_dim,
            embeddings.dim()
        )));
    }
    let model = checkpoint.model();
    let scorer = ModelScorer {
        model: &model,
        embeddings: &embeddings,
    };
    let provenance = Provenance {
        config_hash: cfg.config_hash(),
        lexicon_hash,
        seed: checkpoint.seed.to_string(),
    };
    let report = eval_report(
        &scorer,
        &testset,
        &lexicon,
        cfg.perturbation.cap,
        THRESHOLD,
        provenance,
    )?;
    Ok(EvaluateOutput {
        json: report.to_json(),
        report,
    })
}
