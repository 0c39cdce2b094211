//! Training objectives and their analytic gradients.
//!
//! The logit-pairing objective adds, for every instance `x` in the batch, the
//! exact mean of `|g(x) - g(x')|` over its stored replacement counterfactuals
//! (weighted by `lambda1`) and over its blinded variants (weighted by
//! `lambda2`). Instances with no variants add nothing. Both terms, like the
//! cross-entropy, are averaged over the batch.

use crate::classifier::model::{bce_with_logit, encode, sigmoid, ModelParams};
use crate::dataset::Instance;
use crate::embedding::EmbeddingModel;
use crate::error::{Error, Result};
use crate::perturb::PerturbationSet;

/// A training row reduced to features, with the features of its paired
/// variants.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub features: Vec<f64>,
    pub label: u8,
    pub counterfactuals: Vec<Vec<f64>>,
    pub blinded: Vec<Vec<f64>>,
}

impl Example {
    pub fn new(features: Vec<f64>, label: u8) -> Self {
        Example {
            features,
            label,
            counterfactuals: Vec::new(),
            blinded: Vec::new(),
        }
    }

    pub fn from_instance(
        x: &Instance,
        perturbations: Option<&PerturbationSet>,
        embeddings: &EmbeddingModel,
    ) -> Self {
        let mut ex = Example::new(encode(&x.tokens, embeddings), x.label);
        if let Some(set) = perturbations {
            ex.counterfactuals = set
                .replacements
                .iter()
                .map(|(_, y)| encode(&y.tokens, embeddings))
                .collect();
            ex.blinded = set
                .blinded
                .iter()
                .map(|(_, y)| encode(&y.tokens, embeddings))
                .collect();
        }
        ex
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LossSelector {
    Plain,
    LogitPairing { lambda1: f64, lambda2: f64 },
}

impl LossSelector {
    pub fn logit_pairing(lambda1: f64, lambda2: f64) -> Result<Self> {
        if !(lambda1 >= 0.0 && lambda2 >= 0.0 && lambda1.is_finite() && lambda2.is_finite()) {
            return Err(Error::Config(format!(
                "penalty weights must be finite and nonnegative, got lambda1={lambda1}, lambda2={lambda2}"
            )));
        }
        Ok(LossSelector::LogitPairing { lambda1, lambda2 })
    }
}

/// Mean binary cross entropy over the batch.
pub fn loss_plain(params: &ModelParams, batch: &[&Example]) -> f64 {
    loss(params, batch, LossSelector::Plain)
}

/// Cross entropy plus the logit-pairing penalties.
pub fn loss_logit_pairing(
    params: &ModelParams,
    batch: &[&Example],
    lambda1: f64,
    lambda2: f64,
) -> Result<f64> {
    let sel = LossSelector::logit_pairing(lambda1, lambda2)?;
    Ok(loss(params, batch, sel))
}

pub fn loss(params: &ModelParams, batch: &[&Example], selector: LossSelector) -> f64 {
    evaluate(params, batch, selector, None).total()
}

/// Batch-averaged components of the objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossParts {
    pub cross_entropy: f64,
    /// `lambda1`-weighted replacement term.
    pub replacement: f64,
    /// `lambda2`-weighted blindness term.
    pub blindness: f64,
}

impl LossParts {
    pub fn total(&self) -> f64 {
        let mut t = self.cross_entropy;
        if self.replacement != 0.0 {
            t += self.replacement;
        }
        if self.blindness != 0.0 {
            t += self.blindness;
        }
        t
    }
}

pub fn loss_parts(params: &ModelParams, batch: &[&Example], selector: LossSelector) -> LossParts {
    evaluate(params, batch, selector, None)
}

/// Loss and its gradient with respect to every parameter.
pub fn loss_and_grad(
    params: &ModelParams,
    batch: &[&Example],
    selector: LossSelector,
) -> (f64, ModelParams) {
    let mut grad = ModelParams::zeros(params.input_dim, params.hidden);
    let value = evaluate(params, batch, selector, Some(&mut grad)).total();
    (value, grad)
}

/// The weighted penalty terms alone (zero for `Plain`).
pub fn penalty(params: &ModelParams, batch: &[&Example], selector: LossSelector) -> f64 {
    let parts = loss_parts(params, batch, selector);
    parts.replacement + parts.blindness
}

fn evaluate(
    params: &ModelParams,
    batch: &[&Example],
    selector: LossSelector,
    mut grad: Option<&mut ModelParams>,
) -> LossParts {
    assert!(!batch.is_empty(), "empty batch");
    let n = batch.len() as f64;
    let (lambda1, lambda2) = match selector {
        LossSelector::Plain => (0.0, 0.0),
        LossSelector::LogitPairing { lambda1, lambda2 } => (lambda1, lambda2),
    };

    let mut ce = 0.0;
    let mut pen_r = 0.0;
    let mut pen_b = 0.0;
    for ex in batch {
        let fx = params.forward(&ex.features);
        ce += bce_with_logit(fx.logit, ex.label);
        if let Some(g) = grad.as_deref_mut() {
            let coef = (sigmoid(fx.logit) - f64::from(ex.label)) / n;
            params.accumulate_logit_grad(&ex.features, &fx, coef, g);
        }
        for (lambda, variants, acc) in [
            (lambda1, &ex.counterfactuals, &mut pen_r),
            (lambda2, &ex.blinded, &mut pen_b),
        ] {
            if lambda == 0.0 || variants.is_empty() {
                continue;
            }
            let m = variants.len() as f64;
            let mut sum = 0.0;
            for v in variants {
                let fv = params.forward(v);
                let diff = fx.logit - fv.logit;
                sum += diff.abs();
                if let Some(g) = grad.as_deref_mut() {
                    // subgradient of |.| at 0 is taken as 0
                    let sign = if diff > 0.0 {
                        1.0
                    } else if diff < 0.0 {
                        -1.0
                    } else {
                        0.0
                    };
                    let coef = lambda * sign / (m * n);
                    params.accumulate_logit_grad(&ex.features, &fx, coef, g);
                    params.accumulate_logit_grad(v, &fv, -coef, g);
                }
            }
            *acc += sum / m;
        }
    }
    LossParts {
        cross_entropy: ce / n,
        replacement: lambda1 * pen_r / n,
        blindness: lambda2 * pen_b / n,
    }
}

/// Largest relative difference between the analytic gradient and central
/// finite differences, over every parameter coordinate.
///
/// The difference quotient carries rounding error of a few ulps of the loss
/// divided by `2 * epsilon`; that much disagreement is discounted before
/// dividing, so coordinates whose true gradient is exactly zero are not
/// reported as a relative error of 1.
pub fn gradient_check(
    params: &ModelParams,
    batch: &[&Example],
    selector: LossSelector,
    epsilon: f64,
) -> f64 {
    assert!(
        (1e-8..=1e-3).contains(&epsilon),
        "epsilon must lie in [1e-8, 1e-3]"
    );
    let (_, analytic) = loss_and_grad(params, batch, selector);
    compare_with_differences(params, batch, selector, epsilon, &analytic.to_flat())
}

fn compare_with_differences(
    params: &ModelParams,
    batch: &[&Example],
    selector: LossSelector,
    epsilon: f64,
    analytic: &[f64],
) -> f64 {
    let base = params.to_flat();
    let mut probe = params.clone();
    let mut worst = 0.0f64;
    for (k, &a) in analytic.iter().enumerate() {
        let mut shifted = base.clone();
        shifted[k] = base[k] + epsilon;
        probe.set_flat(&shifted);
        let up = loss(&probe, batch, selector);
        shifted[k] = base[k] - epsilon;
        probe.set_flat(&shifted);
        let down = loss(&probe, batch, selector);
        let numeric = (up - down) / (2.0 * epsilon);
        let rounding = 4.0 * f64::EPSILON * up.abs().max(down.abs()) / (2.0 * epsilon);
        let excess = ((a - numeric).abs() - rounding).max(0.0);
        let rel = excess / f64::max(1e-12, a.abs() + numeric.abs());
        worst = worst.max(rel);
    }
    worst
}
