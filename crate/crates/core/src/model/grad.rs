//! Exact per-example gradients by hand-derived backpropagation.
//!
//! Every weight gradient of a one-hidden-layer network is a rank-one outer
//! product `delta ⊗ input`. [`FactoredGrad`] keeps only the factors, which
//! gives the exact norm in O(width) and lets the training loop accumulate
//! clipped gradients without materializing them; [`per_example_grad`]
//! returns the full tensors.

use super::forward::{softmax, trace, weighted_ce_loss, Trace};
use super::linalg::{axpy, outer_accumulate, sq_norm, transposed_matvec};
use super::params::{ModelParams, ParamSet};
use crate::error::Result;
use crate::features::FeatureMatrix;

/// Gradient tensors of one example and the norm of their concatenation.
#[derive(Debug, Clone, PartialEq)]
pub struct PerExampleGrad {
    pub grads: ParamSet,
    pub l2_norm: f64,
}

impl PerExampleGrad {
    pub fn new(grads: ParamSet) -> Self {
        let l2_norm = grads.l2_norm();
        Self { grads, l2_norm }
    }
}

/// Rank-one factors of a per-example gradient.
#[derive(Debug, Clone)]
pub struct FactoredGrad<'a> {
    x: &'a [f64],
    m: Option<&'a [f64]>,
    audio_delta: Vec<f64>,
    priv_delta: Option<Vec<f64>>,
    fused: Vec<f64>,
    head_delta: Vec<f64>,
    /// Loss value at the evaluated point.
    pub loss: f64,
    /// Class probabilities at the evaluated point.
    pub probs: Vec<f64>,
}

impl FactoredGrad<'_> {
    pub fn l2_norm(&self) -> f64 {
        let layer = |delta: &[f64], input: &[f64]| sq_norm(delta) * (sq_norm(input) + 1.0);
        let mut total = layer(&self.audio_delta, self.x) + layer(&self.head_delta, &self.fused);
        if let (Some(d), Some(m)) = (&self.priv_delta, self.m) {
            total += layer(d, m);
        }
        total.sqrt()
    }

    /// `into += scale * gradient`
    pub fn accumulate(&self, into: &mut ParamSet, scale: f64) {
        outer_accumulate(&mut into.audio.weight, scale, &self.audio_delta, self.x);
        axpy(&mut into.audio.bias, scale, &self.audio_delta);
        outer_accumulate(&mut into.head.weight, scale, &self.head_delta, &self.fused);
        axpy(&mut into.head.bias, scale, &self.head_delta);
        if let (Some(layer), Some(d), Some(m)) = (&mut into.privileged, &self.priv_delta, self.m) {
            outer_accumulate(&mut layer.weight, scale, d, m);
            axpy(&mut layer.bias, scale, d);
        }
    }

    pub fn materialize(&self, params: &ModelParams) -> PerExampleGrad {
        let mut grads = params.tensors.zeros_like();
        self.accumulate(&mut grads, 1.0);
        PerExampleGrad::new(grads)
    }
}

fn backward<'a>(
    params: &ModelParams,
    tr: Trace,
    x: &'a [f64],
    m: Option<&'a [f64]>,
    head_delta: Vec<f64>,
    probs: Vec<f64>,
    loss: f64,
) -> FactoredGrad<'a> {
    let act = params.activation();
    let t = &params.tensors;
    let d_fused = transposed_matvec(&t.head.weight, &head_delta, t.head.inputs);
    let hidden = t.audio.outputs;
    let audio_delta = tr
        .audio_pre
        .iter()
        .zip(&tr.fused[..hidden])
        .zip(&d_fused[..hidden])
        .map(|((&pre, &post), &d)| d * act.derivative(pre, post))
        .collect();
    let priv_delta = tr.priv_pre.as_ref().map(|pre| {
        pre.iter()
            .zip(&tr.fused[hidden..])
            .zip(&d_fused[hidden..])
            .map(|((&pre, &post), &d)| d * act.derivative(pre, post))
            .collect()
    });
    FactoredGrad {
        x,
        m,
        audio_delta,
        priv_delta,
        fused: tr.fused,
        head_delta,
        loss,
        probs,
    }
}

/// Factored gradient of `w * CE(y, softmax(logits))`.
pub fn factored_ce_grad<'a>(
    params: &ModelParams,
    x: &'a [f64],
    m: Option<&'a [f64]>,
    label: usize,
    weight: f64,
) -> Result<FactoredGrad<'a>> {
    let tr = trace(params, x, m)?;
    let probs = softmax(&tr.logits);
    let loss = weighted_ce_loss(&probs, label, weight);
    let mut head_delta: Vec<f64> = probs.iter().map(|p| weight * p).collect();
    head_delta[label] -= weight;
    Ok(backward(params, tr, x, m, head_delta, probs, loss))
}

/// Factored gradient of an arbitrary loss given its gradient with respect to
/// the logits. `logit_loss` maps logits to `(loss, d loss / d logits)`.
pub fn factored_logit_grad<'a, F>(
    params: &ModelParams,
    x: &'a [f64],
    m: Option<&'a [f64]>,
    logit_loss: F,
) -> Result<FactoredGrad<'a>>
where
    F: FnOnce(&[f64]) -> (f64, Vec<f64>),
{
    let tr = trace(params, x, m)?;
    let (loss, head_delta) = logit_loss(&tr.logits);
    let probs = softmax(&tr.logits);
    Ok(backward(params, tr, x, m, head_delta, probs, loss))
}

/// Exact gradient of `weighted_ce_loss(forward(params, x, m), label, weight)`.
pub fn per_example_grad(
    params: &ModelParams,
    x: &FeatureMatrix,
    m: Option<&[f64]>,
    label: usize,
    weight: f64,
) -> Result<PerExampleGrad> {
    Ok(factored_ce_grad(params, x.as_slice(), m, label, weight)?.materialize(params))
}
