//! Run configuration: one TOML file holding every stage's settings plus
//! file paths.
//!
//! ```toml
//! seed = 7
//!
//! [augmentation]
//! tau = 0.25
//!
//! [train]
//! scheme = "logit_pairing"
//!
//! [paths]
//! embeddings = "glove.txt"
//! known_pairs = "known_pairs.tsv"
//! dataset = "train.csv"
//! ```
//!
//! Relative paths are resolved against the config file's directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::augment::AugmentationConfig;
use crate::classifier::TrainConfig;
use crate::error::{Error, Result};
use crate::perturb::PerturbationConfig;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Paths {
    pub embeddings: Option<PathBuf>,
    pub known_pairs: Option<PathBuf>,
    /// Identity lexicon read by `perturb`, `train` and `evaluate`; defaults
    /// to `<out>/lexicon.tsv`.
    pub lexicon: Option<PathBuf>,
    pub placeholders: Option<PathBuf>,
    pub dataset: Option<PathBuf>,
    pub testset: Option<PathBuf>,
    /// Checkpoint read by `evaluate`; defaults to `<out>/checkpoint.json`.
    pub checkpoint: Option<PathBuf>,
    /// Output directory for every artifact.
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// When set, overrides both `perturbation.seed` and `train.seed`.
    pub seed: Option<u64>,
    /// Expected vector dimension of the embedding file.
    pub embedding_dim: Option<usize>,
    /// Read only the first `max_words` rows of the embedding file.
    pub max_words: Option<usize>,
    pub augmentation: AugmentationConfig,
    pub perturbation: PerturbationConfig,
    pub train: TrainConfig,
    pub paths: Paths,
}

/// The settings that determine results, in a fixed field order.
#[derive(Serialize)]
struct Hashed<'a> {
    embedding_dim: Option<usize>,
    max_words: Option<usize>,
    augmentation: &'a AugmentationConfig,
    perturbation: &'a PerturbationConfig,
    train: &'a TrainConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Parse `path` and resolve relative paths against its directory.
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if let Some(base) = path.parent() {
            cfg.paths.rebase(base);
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Copy the top-level seed into the stage configs.
    pub fn resolved(&self) -> Self {
        let mut cfg = self.clone();
        if let Some(seed) = cfg.seed {
            cfg.perturbation.seed = seed;
            cfg.train.seed = seed;
        }
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        self.augmentation.validate()?;
        self.perturbation.validate()?;
        self.train.validate()
    }

    /// SHA-256 over a canonical JSON rendering of every setting that affects
    /// results. Paths are excluded, so moving inputs or outputs does not
    /// change the digest.
    pub fn config_hash(&self) -> String {
        let cfg = self.resolved();
        let canonical = serde_json::to_vec(&Hashed {
            embedding_dim: cfg.embedding_dim,
            max_words: cfg.max_words,
            augmentation: &cfg.augmentation,
            perturbation: &cfg.perturbation,
            train: &cfg.train,
        })
        .expect("config serializes");
        hex::encode(Sha256::digest(canonical))
    }

    pub fn out_dir(&self) -> PathBuf {
        self.paths.out.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    pub fn lexicon_path(&self) -> PathBuf {
        self.paths
            .lexicon
            .clone()
            .unwrap_or_else(|| self.out_dir().join(LEXICON_FILE))
    }

    pub fn checkpoint_path(&self) -> PathBuf {
        self.paths
            .checkpoint
            .clone()
            .unwrap_or_else(|| self.out_dir().join(CHECKPOINT_FILE))
    }
}

/// The path in `value`, or a config error naming `field`.
pub fn required<'a>(field: &str, value: &'a Option<PathBuf>) -> Result<&'a Path> {
    value
        .as_deref()
        .ok_or_else(|| Error::Config(format!("missing path `{field}`")))
}

impl Paths {
    fn rebase(&mut self, base: &Path) {
        for p in [
            &mut self.embeddings,
            &mut self.known_pairs,
            &mut self.lexicon,
            &mut self.placeholders,
            &mut self.dataset,
            &mut self.testset,
            &mut self.checkpoint,
            &mut self.out,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }
}

pub const LEXICON_FILE: &str = "lexicon.tsv";
pub const PERTURBED_FILE: &str = "perturbed.csv";
pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const TRAINING_LOG_FILE: &str = "training_log.csv";
pub const REPORT_FILE: &str = "report.json";
