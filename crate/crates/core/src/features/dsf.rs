//! Binary feature file: `DSF1`, u32 n_mels, u32 frames, then row-major
//! little-endian f32 values.

use std::path::Path;

use super::Spectrogram;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"DSF1";

pub fn encode_features(spec: &Spectrogram) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + 4 * spec.values.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(spec.n_mels as u32).to_le_bytes());
    out.extend_from_slice(&(spec.frames as u32).to_le_bytes());
    for &v in &spec.values {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

pub fn decode_features(bytes: &[u8]) -> Result<Spectrogram> {
    if bytes.len() < 12 || &bytes[0..4] != MAGIC {
        return Err(Error::MalformedFeatures("missing DSF1 header".into()));
    }
    let n_mels = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let frames = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let expected = n_mels
        .checked_mul(frames)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| Error::MalformedFeatures("dimensions overflow".into()))?;
    if bytes.len() - 12 != expected {
        return Err(Error::MalformedFeatures(format!(
            "{n_mels}x{frames} needs {expected} data bytes, found {}",
            bytes.len() - 12
        )));
    }
    let values = bytes[12..]
        .chunks_exact(4)
        .map(|c| f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]])))
        .collect();
    Spectrogram::new(n_mels, frames, values)
}

pub fn write_features(path: &Path, spec: &Spectrogram) -> Result<()> {
    std::fs::write(path, encode_features(spec)).map_err(|e| Error::io(path, e))
}

pub fn read_features(path: &Path) -> Result<Spectrogram> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_features(&bytes)
}
