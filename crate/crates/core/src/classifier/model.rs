//! Bag-of-embeddings scorer: mean token vector → ReLU hidden layer → logit.
//!
//! Embeddings are frozen, so every instance is reduced once to its feature
//! vector and the network only ever sees features.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::embedding::EmbeddingModel;
use crate::text::is_placeholder;

/// Mean of the in-vocabulary token vectors; zero when no token is known.
/// Placeholder tokens never match the vocabulary.
pub fn encode<S: AsRef<str>>(tokens: &[S], embeddings: &EmbeddingModel) -> Vec<f64> {
    let mut sum = vec![0.0; embeddings.dim()];
    let mut count = 0usize;
    for t in tokens {
        let t = t.as_ref();
        if is_placeholder(t) {
            continue;
        }
        if let Some(v) = embeddings.vector(t) {
            for (s, x) in sum.iter_mut().zip(v) {
                *s += x;
            }
            count += 1;
        }
    }
    if count > 0 {
        let n = count as f64;
        for s in &mut sum {
            *s /= n;
        }
    }
    sum
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Binary cross entropy of logit `g` against label `y`, computed stably.
pub fn bce_with_logit(g: f64, y: u8) -> f64 {
    let y = f64::from(y);
    g.max(0.0) - y * g + (-g.abs()).exp().ln_1p()
}

/// Network parameters. `w1` is `input_dim × hidden`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub input_dim: usize,
    pub hidden: usize,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

/// Hidden pre-activations and logit of one forward pass.
#[derive(Debug, Clone)]
pub struct Forward {
    pub pre: Vec<f64>,
    pub logit: f64,
}

impl ModelParams {
    pub fn zeros(input_dim: usize, hidden: usize) -> Self {
        assert!(hidden >= 1, "hidden width must be at least 1");
        ModelParams {
            input_dim,
            hidden,
            w1: vec![0.0; input_dim * hidden],
            b1: vec![0.0; hidden],
            w2: vec![0.0; hidden],
            b2: 0.0,
        }
    }

    /// Uniform in `±1/sqrt(fan_in)` per layer.
    pub fn init<R: Rng + ?Sized>(input_dim: usize, hidden: usize, rng: &mut R) -> Self {
        let mut p = Self::zeros(input_dim, hidden);
        let a1 = 1.0 / (input_dim.max(1) as f64).sqrt();
        let a2 = 1.0 / (hidden as f64).sqrt();
        for w in p.w1.iter_mut().chain(p.b1.iter_mut()) {
            *w = rng.gen_range(-a1..=a1);
        }
        for w in &mut p.w2 {
            *w = rng.gen_range(-a2..=a2);
        }
        p.b2 = rng.gen_range(-a2..=a2);
        p
    }

    pub fn num_params(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + 1
    }

    /// Parameters in declared order: w1, b1, w2, b2.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        out.extend_from_slice(&self.w1);
        out.extend_from_slice(&self.b1);
        out.extend_from_slice(&self.w2);
        out.push(self.b2);
        out
    }

    pub fn set_flat(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.num_params());
        let (w1, rest) = flat.split_at(self.w1.len());
        let (b1, rest) = rest.split_at(self.b1.len());
        let (w2, rest) = rest.split_at(self.w2.len());
        self.w1.copy_from_slice(w1);
        self.b1.copy_from_slice(b1);
        self.w2.copy_from_slice(w2);
        self.b2 = rest[0];
    }

    pub fn is_finite(&self) -> bool {
        self.w1
            .iter()
            .chain(&self.b1)
            .chain(&self.w2)
            .all(|v| v.is_finite())
            && self.b2.is_finite()
    }

    pub fn forward(&self, features: &[f64]) -> Forward {
        debug_assert_eq!(features.len(), self.input_dim);
        let h = self.hidden;
        let mut pre = self.b1.clone();
        for (i, &e) in features.iter().enumerate() {
            if e == 0.0 {
                continue;
            }
            let row = &self.w1[i * h..(i + 1) * h];
            for (z, &w) in pre.iter_mut().zip(row) {
                *z += e * w;
            }
        }
        let mut logit = self.b2;
        for (z, w) in pre.iter().zip(&self.w2) {
            if *z > 0.0 {
                logit += w * z;
            }
        }
        Forward { pre, logit }
    }

    pub fn logit(&self, features: &[f64]) -> f64 {
        self.forward(features).logit
    }

    pub fn probability(&self, features: &[f64]) -> f64 {
        sigmoid(self.logit(features))
    }

    /// `grad += coef * d logit / d params` at `features`.
    pub fn accumulate_logit_grad(
        &self,
        features: &[f64],
        fwd: &Forward,
        coef: f64,
        grad: &mut ModelParams,
    ) {
        if coef == 0.0 {
            return;
        }
        let h = self.hidden;
        grad.b2 += coef;
        for j in 0..h {
            let z = fwd.pre[j];
            if z > 0.0 {
                grad.w2[j] += coef * z;
                let dz = coef * self.w2[j];
                grad.b1[j] += dz;
                for (i, &e) in features.iter().enumerate() {
                    grad.w1[i * h + j] += dz * e;
                }
            }
        }
    }
}
