//! Versioned JSON checkpoint. Floats are written in shortest round-trip form
//! and parsed exactly, so save → load is bit-exact.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classifier::model::ModelParams;
use crate::classifier::train::{Blinding, Scheme, TrainedModel};
use crate::error::{Error, Result};

pub const CHECKPOINT_FORMAT: &str = "cfaug-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub seed: u64,
    pub config_hash: String,
    pub lexicon_hash: Option<String>,
    pub scheme: Scheme,
    pub blinding: Option<Blinding>,
    pub params: ModelParams,
}

impl Checkpoint {
    pub fn new(
        model: &TrainedModel,
        seed: u64,
        config_hash: impl Into<String>,
        lexicon_hash: Option<String>,
    ) -> Self {
        Checkpoint {
            format: CHECKPOINT_FORMAT.to_string(),
            version: CHECKPOINT_VERSION,
            seed,
            config_hash: config_hash.into(),
            lexicon_hash,
            scheme: model.scheme,
            blinding: model.blinding.clone(),
            params: model.params.clone(),
        }
    }

    pub fn model(&self) -> TrainedModel {
        TrainedModel {
            params: self.params.clone(),
            scheme: self.scheme,
            blinding: self.blinding.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("checkpoint serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str, origin: &Path) -> Result<Self> {
        let ck: Checkpoint = serde_json::from_str(text)
            .map_err(|e| Error::parse(origin, e.line(), e.to_string()))?;
        if ck.format != CHECKPOINT_FORMAT || ck.version != CHECKPOINT_VERSION {
            return Err(Error::parse(
                origin,
                1,
                format!("unsupported checkpoint {} v{}", ck.format, ck.version),
            ));
        }
        let p = &ck.params;
        if p.hidden == 0
            || p.w1.len() != p.input_dim * p.hidden
            || p.b1.len() != p.hidden
            || p.w2.len() != p.hidden
        {
            return Err(Error::parse(
                origin,
                1,
                "parameter arrays do not match dimensions",
            ));
        }
        if !p.is_finite() {
            return Err(Error::parse(origin, 1, "non-finite parameter"));
        }
        Ok(ck)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, path)
    }
}
