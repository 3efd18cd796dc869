//! Deterministic per-example acoustic front-end.
//!
//! Audio is decoded from 16-bit PCM mono WAV, turned into a log-Mel
//! spectrogram, and finally mapped to a fixed-length [`FeatureMatrix`] by a
//! [`FrontEnd`] (per-utterance normalization or plain length alignment).
//! Every function here is pure.

mod dsaf;
mod dsf;
mod mel;
mod wav;

use serde::{Deserialize, Serialize};

pub use dsaf::{dsaf, frontend, frontends, utterance_stats, Dsaf, FeatureMatrix, FixedLength, FrontEnd, FrontEndCtor};
pub use dsf::{decode_features, encode_features, read_features, write_features};
pub use mel::{frame_count, hz_to_mel, log_mel, mel_band_centers, mel_filterbank, mel_to_hz, Spectrogram};
pub use wav::{decode_wav, encode_wav, RawAudio};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrontEndConfig {
    pub n_mels: usize,
    pub window_ms: f64,
    pub hop_ms: f64,
    pub f_min: f64,
    /// Upper filterbank edge; Nyquist when unset.
    pub f_max: Option<f64>,
    pub log_floor: f64,
    /// Fixed frame count `L` of the model input.
    pub frames: usize,
    pub eta0: f64,
    /// Registered front-end name: `dsaf` or `fixlen`.
    pub frontend: String,
}

impl Default for FrontEndConfig {
    fn default() -> Self {
        Self {
            n_mels: 40,
            window_ms: 25.0,
            hop_ms: 10.0,
            f_min: 0.0,
            f_max: None,
            log_floor: 1e-10,
            frames: 100,
            eta0: 1e-5,
            frontend: "dsaf".into(),
        }
    }
}

impl FrontEndConfig {
    pub fn window_samples(&self, sample_rate: u32) -> usize {
        (f64::from(sample_rate) * self.window_ms / 1000.0).round() as usize
    }

    pub fn hop_samples(&self, sample_rate: u32) -> usize {
        (f64::from(sample_rate) * self.hop_ms / 1000.0).round() as usize
    }

    /// Flattened model input dimension `n_mels * frames`.
    pub fn input_dim(&self) -> usize {
        self.n_mels * self.frames
    }
}
