//! Per-utterance normalization with fixed-length alignment, and the
//! front-end strategies that turn a stored spectrogram into model input.

use serde::{Deserialize, Serialize};

use super::{FrontEndConfig, Spectrogram};
use crate::error::Result;
use crate::registry::Registry;

/// Fixed-length model input, row-major `[n_mels × frames]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub n_mels: usize,
    pub frames: usize,
    pub values: Vec<f64>,
}

impl FeatureMatrix {
    pub fn zeros(n_mels: usize, frames: usize) -> Self {
        Self {
            n_mels,
            frames,
            values: vec![0.0; n_mels * frames],
        }
    }

    /// Flattened row-major view used as the encoder input.
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

/// Scalar mean and population standard deviation over every entry.
///
/// Accumulated relative to the first entry, so a constant input yields its
/// value and a zero deviation exactly.
pub fn utterance_stats(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let pivot = values[0];
    let mean = pivot + values.iter().map(|v| v - pivot).sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Keeps the first `frames` columns, right-padding with `pad`.
fn fix_len(n_mels: usize, src_frames: usize, values: &[f64], frames: usize, pad: f64) -> FeatureMatrix {
    let keep = src_frames.min(frames);
    let mut out = vec![pad; n_mels * frames];
    for band in 0..n_mels {
        out[band * frames..band * frames + keep].copy_from_slice(&values[band * src_frames..band * src_frames + keep]);
    }
    FeatureMatrix {
        n_mels,
        frames,
        values: out,
    }
}

/// `(S - mean(S)) / (std(S) + eta0)`, then truncate or zero-pad to `frames`.
pub fn dsaf(spec: &Spectrogram, frames: usize, eta0: f64) -> FeatureMatrix {
    assert!(frames >= 1, "frame count must be at least 1");
    assert!(eta0 > 0.0, "eta0 must be positive");
    let (mean, std) = utterance_stats(&spec.values);
    let scale = std + eta0;
    let normalized: Vec<f64> = spec.values.iter().map(|v| (v - mean) / scale).collect();
    fix_len(spec.n_mels, spec.frames, &normalized, frames, 0.0)
}

/// Turns a stored per-utterance matrix into a fixed-length model input.
pub trait FrontEnd: Send + Sync {
    fn name(&self) -> &'static str;
    fn apply(&self, spec: &Spectrogram) -> FeatureMatrix;
}

pub struct Dsaf {
    pub frames: usize,
    pub eta0: f64,
}

impl FrontEnd for Dsaf {
    fn name(&self) -> &'static str {
        "dsaf"
    }

    fn apply(&self, spec: &Spectrogram) -> FeatureMatrix {
        dsaf(spec, self.frames, self.eta0)
    }
}

/// Length alignment only; values pass through unnormalized.
pub struct FixedLength {
    pub frames: usize,
}

impl FrontEnd for FixedLength {
    fn name(&self) -> &'static str {
        "fixlen"
    }

    fn apply(&self, spec: &Spectrogram) -> FeatureMatrix {
        fix_len(spec.n_mels, spec.frames, &spec.values, self.frames, 0.0)
    }
}

pub type FrontEndCtor = fn(&FrontEndConfig) -> Box<dyn FrontEnd>;

fn make_dsaf(cfg: &FrontEndConfig) -> Box<dyn FrontEnd> {
    Box::new(Dsaf {
        frames: cfg.frames,
        eta0: cfg.eta0,
    })
}

fn make_fixlen(cfg: &FrontEndConfig) -> Box<dyn FrontEnd> {
    Box::new(FixedLength { frames: cfg.frames })
}

pub fn frontends() -> Registry<FrontEndCtor> {
    Registry::new("front-end")
        .register("dsaf", make_dsaf as FrontEndCtor)
        .register("fixlen", make_fixlen)
}

pub fn frontend(cfg: &FrontEndConfig) -> Result<Box<dyn FrontEnd>> {
    Ok(frontends().get(&cfg.frontend)?(cfg))
}
