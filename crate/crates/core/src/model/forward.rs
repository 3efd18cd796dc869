use rand::Rng;

use super::linalg::affine;
use super::params::ModelParams;
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

/// Floor applied to the true-class probability inside the log.
pub const CE_LOG_FLOOR: f64 = 1e-12;

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Intermediate activations kept for backpropagation.
#[derive(Debug, Clone)]
pub(crate) struct Trace {
    pub audio_pre: Vec<f64>,
    pub priv_pre: Option<Vec<f64>>,
    /// Head input: audio encoding followed by the privileged encoding.
    pub fused: Vec<f64>,
    pub logits: Vec<f64>,
}

pub(crate) fn trace(params: &ModelParams, x: &[f64], m: Option<&[f64]>) -> Result<Trace> {
    let arch = params.arch();
    if x.len() != arch.input_dim {
        return Err(Error::ShapeMismatch(format!(
            "features have {} values, network expects {}",
            x.len(),
            arch.input_dim
        )));
    }
    let act = params.activation();
    let t = &params.tensors;
    let audio_pre = affine(&t.audio.weight, &t.audio.bias, x);
    let mut fused: Vec<f64> = audio_pre.iter().map(|&p| act.apply(p)).collect();

    let priv_pre = match (&t.privileged, m) {
        (Some(layer), Some(m)) => {
            if m.len() != layer.inputs {
                return Err(Error::ShapeMismatch(format!(
                    "privileged vector has {} values, network expects {}",
                    m.len(),
                    layer.inputs
                )));
            }
            let pre = affine(&layer.weight, &layer.bias, m);
            fused.extend(pre.iter().map(|&p| act.apply(p)));
            Some(pre)
        }
        (Some(_), None) => {
            return Err(Error::ShapeMismatch(
                "multimodal network needs a privileged vector (zero vector for audio-only queries)".into(),
            ))
        }
        (None, _) => None,
    };
    let logits = affine(&t.head.weight, &t.head.bias, &fused);
    Ok(Trace {
        audio_pre,
        priv_pre,
        fused,
        logits,
    })
}

/// Class logits. `m` is ignored by audio-only networks and required by multimodal ones.
pub fn logits(params: &ModelParams, x: &FeatureMatrix, m: Option<&[f64]>) -> Result<Vec<f64>> {
    Ok(trace(params, x.as_slice(), m)?.logits)
}

/// `softmax(head([h_x(x); h_m(m)]))`, or `softmax(head(h_x(x)))` for audio-only teachers.
pub fn forward_teacher(params: &ModelParams, x: &FeatureMatrix, m: Option<&[f64]>) -> Result<Vec<f64>> {
    Ok(softmax(&logits(params, x, m)?))
}

/// Audio-only forward pass; rejects networks with a privileged branch.
pub fn forward_student(params: &ModelParams, x: &FeatureMatrix) -> Result<Vec<f64>> {
    if params.is_multimodal() {
        return Err(Error::ShapeMismatch("student networks are audio-only".into()));
    }
    forward_teacher(params, x, None)
}

/// `w * -ln(max(probs[y], 1e-12))`
pub fn weighted_ce_loss(probs: &[f64], y: usize, w: f64) -> f64 {
    w * -probs[y].max(CE_LOG_FLOOR).ln()
}

/// Replaces the whole privileged vector by zeros with probability `p`.
pub fn priv_dropout<R: Rng + ?Sized>(m: &[f64], p: f64, rng: &mut R) -> Vec<f64> {
    if rng.random::<f64>() < p {
        vec![0.0; m.len()]
    } else {
        m.to_vec()
    }
}
