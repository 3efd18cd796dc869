//! Synthetic imbalanced speech-like data.
//!
//! Each class owns a fixed random template over the `[n_mels × frames]`
//! grid; an utterance is `gain * (base + template[y] + noise) + offset`,
//! where `base` is a shared spectral tilt, `noise` is unit Gaussian, and the
//! per-utterance gain and offset mimic loudness and channel variation. The
//! templates are scaled so that the expected distance between two class
//! templates equals `separation` (in noise standard deviations).

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Dataset, Example};
use crate::error::{Error, Result};
use crate::features::Spectrogram;
use crate::rng::{stream, BoxMuller, Stream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    pub num_classes: usize,
    pub proportions: Vec<f64>,
    pub n: usize,
    pub n_mels: usize,
    pub frames: usize,
    /// Utterance lengths are uniform in `frames ± frame_jitter`.
    pub frame_jitter: usize,
    pub separation: f64,
    /// Probability that the latent attribute equals the label.
    pub correlation: f64,
    /// Emit one-hot privileged vectors (dimension K).
    pub multimodal: bool,
    /// Std of the log-gain.
    pub gain_spread: f64,
    /// Std of the additive per-utterance offset.
    pub offset_spread: f64,
    pub base_level: f64,
    pub examples_per_recording: usize,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            num_classes: 3,
            proportions: vec![0.80, 0.17, 0.03],
            n: 6000,
            n_mels: 40,
            frames: 100,
            frame_jitter: 10,
            separation: 8.0,
            correlation: 0.9,
            multimodal: true,
            gain_spread: 0.5,
            offset_spread: 3.0,
            base_level: -6.0,
            examples_per_recording: 1,
        }
    }
}

/// Rounds `proportions * n` to integers summing to `n`, giving leftover units
/// to the largest fractional parts (ties to the lower class index).
pub fn largest_remainder_counts(proportions: &[f64], n: usize) -> Result<Vec<usize>> {
    let total: f64 = proportions.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidConfig(format!("proportions sum to {total}, not 1")));
    }
    if proportions.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::InvalidConfig("proportions must lie in [0, 1]".into()));
    }
    let exact: Vec<f64> = proportions.iter().map(|p| p * n as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..proportions.len()).collect();
    order.sort_by(|&a, &b| {
        let (fa, fb) = (exact[a] - exact[a].floor(), exact[b] - exact[b].floor());
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &k in order.iter().take(n.saturating_sub(assigned)) {
        counts[k] += 1;
    }
    Ok(counts)
}

pub fn synth_generate(spec: &SynthSpec, seed: u64) -> Result<Dataset> {
    let k = spec.num_classes;
    if spec.proportions.len() != k {
        return Err(Error::InvalidConfig(format!(
            "{} proportions given for {k} classes",
            spec.proportions.len()
        )));
    }
    if spec.n_mels == 0 || spec.frames == 0 || spec.frame_jitter >= spec.frames {
        return Err(Error::InvalidConfig(
            "need n_mels, frames > 0 and jitter < frames".into(),
        ));
    }
    if !(0.0..=1.0).contains(&spec.correlation) || spec.examples_per_recording == 0 {
        return Err(Error::InvalidConfig(
            "correlation must lie in [0, 1], recordings non-empty".into(),
        ));
    }
    let counts = largest_remainder_counts(&spec.proportions, spec.n)?;

    let mut rng = stream(seed, Stream::Synth);
    let mut gauss = BoxMuller::new();
    let max_frames = spec.frames + spec.frame_jitter;
    let dim = spec.n_mels * spec.frames;
    let template_scale = spec.separation / (2.0 * dim as f64).sqrt();
    let templates: Vec<Vec<f64>> = (0..k)
        .map(|_| {
            (0..spec.n_mels * max_frames)
                .map(|_| template_scale * gauss.sample(&mut rng))
                .collect()
        })
        .collect();
    let tilt: Vec<f64> = (0..spec.n_mels)
        .map(|b| spec.base_level - 3.0 * b as f64 / spec.n_mels as f64)
        .collect();

    let mut labels: Vec<usize> = counts
        .iter()
        .enumerate()
        .flat_map(|(class, &c)| std::iter::repeat_n(class, c))
        .collect();
    labels.shuffle(&mut rng);

    let mut examples = Vec::with_capacity(spec.n);
    for (i, &label) in labels.iter().enumerate() {
        let frames = spec.frames - spec.frame_jitter + rng.random_range(0..=2 * spec.frame_jitter);
        let gain = (spec.gain_spread * gauss.sample(&mut rng)).exp();
        let offset = spec.offset_spread * gauss.sample(&mut rng);
        let mut values = Vec::with_capacity(spec.n_mels * frames);
        for (b, base) in tilt.iter().enumerate() {
            for t in 0..frames {
                let clean = base + templates[label][b * max_frames + t] + gauss.sample(&mut rng);
                // stored at f32 precision so in-memory data equals its DSF1 file
                values.push(f64::from((gain * clean + offset) as f32));
            }
        }
        let privileged = spec.multimodal.then(|| {
            let attribute = if k == 1 || rng.random::<f64>() < spec.correlation {
                label
            } else {
                let other = rng.random_range(0..k - 1);
                if other >= label {
                    other + 1
                } else {
                    other
                }
            };
            let mut one_hot = vec![0.0; k];
            one_hot[attribute] = 1.0;
            one_hot
        });
        examples.push(Example {
            id: format!("ex-{i:06}"),
            recording_id: format!("rec-{:06}", i / spec.examples_per_recording),
            features: Spectrogram::new(spec.n_mels, frames, values)?,
            privileged,
            label,
        });
    }
    Dataset::new(examples, k)
}
