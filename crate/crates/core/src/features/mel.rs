//! Log-Mel spectrogram: Hann-windowed STFT, triangular HTK Mel filterbank,
//! natural log of energy plus a floor.

use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use super::{FrontEndConfig, RawAudio};
use crate::error::{Error, Result};

/// Log-Mel energies, row-major `[n_mels × frames]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrogram {
    pub n_mels: usize,
    pub frames: usize,
    pub values: Vec<f64>,
}

impl Spectrogram {
    pub fn new(n_mels: usize, frames: usize, values: Vec<f64>) -> Result<Self> {
        if n_mels == 0 || frames == 0 {
            return Err(Error::ShapeMismatch(format!(
                "spectrogram must be non-empty, got {n_mels}x{frames}"
            )));
        }
        if values.len() != n_mels * frames {
            return Err(Error::ShapeMismatch(format!(
                "spectrogram {n_mels}x{frames} needs {} values, got {}",
                n_mels * frames,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::MalformedFeatures("non-finite spectrogram entry".into()));
        }
        Ok(Self { n_mels, frames, values })
    }

    pub fn get(&self, band: usize, frame: usize) -> f64 {
        self.values[band * self.frames + frame]
    }

    /// Mean over time for each band.
    pub fn band_means(&self) -> Vec<f64> {
        self.values
            .chunks(self.frames)
            .map(|row| row.iter().sum::<f64>() / self.frames as f64)
            .collect()
    }
}

pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Center frequencies (Hz) of the `n_mels` triangular filters.
pub fn mel_band_centers(n_mels: usize, f_min: f64, f_max: f64) -> Vec<f64> {
    mel_edges(n_mels, f_min, f_max)[1..=n_mels].to_vec()
}

fn mel_edges(n_mels: usize, f_min: f64, f_max: f64) -> Vec<f64> {
    let (lo, hi) = (hz_to_mel(f_min), hz_to_mel(f_max));
    (0..n_mels + 2)
        .map(|i| mel_to_hz(lo + (hi - lo) * i as f64 / (n_mels + 1) as f64))
        .collect()
}

/// Triangular filterbank, row-major `[n_mels × (n_fft/2 + 1)]`, unit peak.
pub fn mel_filterbank(n_mels: usize, n_fft: usize, sample_rate: u32, f_min: f64, f_max: f64) -> Vec<f64> {
    let n_bins = n_fft / 2 + 1;
    let edges = mel_edges(n_mels, f_min, f_max);
    let mut bank = vec![0.0; n_mels * n_bins];
    for m in 0..n_mels {
        let (left, center, right) = (edges[m], edges[m + 1], edges[m + 2]);
        for k in 0..n_bins {
            let f = k as f64 * f64::from(sample_rate) / n_fft as f64;
            let w = if f > left && f <= center {
                (f - left) / (center - left)
            } else if f > center && f < right {
                (right - f) / (right - center)
            } else {
                0.0
            };
            bank[m * n_bins + k] = w;
        }
    }
    bank
}

fn hann(len: usize) -> Vec<f64> {
    // periodic Hann
    (0..len)
        .map(|n| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * n as f64 / len as f64).cos())
        .collect()
}

/// Number of frames produced for `n` samples without centering or padding.
pub fn frame_count(n: usize, window: usize, hop: usize) -> usize {
    if n < window {
        0
    } else {
        (n - window) / hop + 1
    }
}

pub fn log_mel(audio: &RawAudio, cfg: &FrontEndConfig) -> Result<Spectrogram> {
    let window = cfg.window_samples(audio.sample_rate);
    let hop = cfg.hop_samples(audio.sample_rate);
    if window == 0 || hop == 0 {
        return Err(Error::InvalidConfig(
            "window and hop must be at least one sample".into(),
        ));
    }
    let frames = frame_count(audio.samples.len(), window, hop);
    if frames == 0 {
        return Err(Error::AudioTooShort {
            samples: audio.samples.len(),
            window,
        });
    }
    let f_max = cfg
        .f_max
        .unwrap_or(f64::from(audio.sample_rate) / 2.0)
        .min(f64::from(audio.sample_rate) / 2.0);
    let n_bins = window / 2 + 1;
    let bank = mel_filterbank(cfg.n_mels, window, audio.sample_rate, cfg.f_min, f_max);
    let win = hann(window);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(window);

    let mut values = vec![0.0; cfg.n_mels * frames];
    let mut buf = vec![Complex::new(0.0, 0.0); window];
    let mut power = vec![0.0; n_bins];
    for t in 0..frames {
        let start = t * hop;
        for (slot, (s, w)) in buf
            .iter_mut()
            .zip(audio.samples[start..start + window].iter().zip(&win))
        {
            *slot = Complex::new(s * w, 0.0);
        }
        fft.process(&mut buf);
        for (p, c) in power.iter_mut().zip(&buf) {
            *p = c.norm_sqr();
        }
        for m in 0..cfg.n_mels {
            let row = &bank[m * n_bins..(m + 1) * n_bins];
            let energy: f64 = row.iter().zip(&power).map(|(w, p)| w * p).sum();
            values[m * frames + t] = (energy + cfg.log_floor).ln();
        }
    }
    Spectrogram::new(cfg.n_mels, frames, values)
}
