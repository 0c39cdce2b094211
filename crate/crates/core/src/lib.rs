//! Counterfactual identity augmentation for text classification.
//!
//! The crate covers the whole pipeline:
//!
//! - [`embedding`]: GloVe tables and exact cosine top-k search.
//! - [`augment`]: expansion of seed identity pairs through embedding
//!   neighbourhoods, filtered by a Jaccard check.
//! - [`perturb`]: replacement, blindness and swap perturbations.
//! - [`classifier`]: a small bag-of-embeddings classifier trained plainly,
//!   on blinded or augmented data, or with a penalty that pairs logits
//!   across counterfactuals.
//! - [`eval`]: counterfactual token fairness gap, accuracy and AUC.
//! - [`pipeline`]: the file-level commands behind the CLI.

pub mod augment;
pub mod classifier;
pub mod config;
pub mod dataset;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod io;
pub mod lexicon;
pub mod perturb;
pub mod pipeline;
pub mod stem;
pub mod synthetic;
pub mod text;

pub use error::{Error, Result};
