//! Minimal RIFF/WAVE reader and writer for 16-bit PCM mono audio.

use crate::error::{Error, Result};

/// Decoded audio, amplitudes in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RawAudio {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

impl RawAudio {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyInput("audio has no samples".into()));
        }
        if sample_rate == 0 {
            return Err(Error::InvalidConfig("sample rate must be positive".into()));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidConfig("audio samples must be finite".into()));
        }
        Ok(Self { samples, sample_rate })
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.sample_rate)
    }
}

fn read_u16(bytes: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([bytes[at], bytes[at + 1]])
}

fn read_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([bytes[at], bytes[at + 1], bytes[at + 2], bytes[at + 3]])
}

/// Decodes a 16-bit PCM mono WAV file. Samples are scaled by `1/32768`.
pub fn decode_wav(bytes: &[u8]) -> Result<RawAudio> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(Error::MalformedHeader("missing RIFF/WAVE signature".into()));
    }

    let mut pos = 12;
    let mut format: Option<(u16, u16, u32, u16)> = None;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = read_u32(bytes, pos + 4) as usize;
        let body = pos + 8;
        match id {
            b"fmt " => {
                if size < 16 || body + 16 > bytes.len() {
                    return Err(Error::MalformedHeader("fmt chunk too short".into()));
                }
                let audio_format = read_u16(bytes, body);
                let channels = read_u16(bytes, body + 2);
                let sample_rate = read_u32(bytes, body + 4);
                let bits = read_u16(bytes, body + 14);
                format = Some((audio_format, channels, sample_rate, bits));
            }
            b"data" => {
                let (audio_format, channels, sample_rate, bits) =
                    format.ok_or_else(|| Error::MalformedHeader("data chunk before fmt chunk".into()))?;
                if audio_format != 1 {
                    return Err(Error::UnsupportedEncoding(format!(
                        "audio format {audio_format} (only PCM=1 is supported)"
                    )));
                }
                if channels != 1 {
                    return Err(Error::UnsupportedEncoding(format!(
                        "{channels} channels (only mono is supported)"
                    )));
                }
                if bits != 16 {
                    return Err(Error::UnsupportedEncoding(format!(
                        "{bits}-bit samples (only 16-bit is supported)"
                    )));
                }
                if sample_rate == 0 {
                    return Err(Error::MalformedHeader("sample rate is zero".into()));
                }
                let available = bytes.len() - body;
                if size > available || !size.is_multiple_of(2) {
                    return Err(Error::TruncatedData {
                        expected: size,
                        found: available,
                    });
                }
                let samples: Vec<f64> = bytes[body..body + size]
                    .chunks_exact(2)
                    .map(|c| f64::from(i16::from_le_bytes([c[0], c[1]])) / 32768.0)
                    .collect();
                return RawAudio::new(samples, sample_rate);
            }
            _ => {}
        }
        // chunks are word aligned
        pos = body + size + (size & 1);
    }
    Err(Error::MalformedHeader(
        if format.is_some() {
            "missing data chunk"
        } else {
            "missing fmt chunk"
        }
        .into(),
    ))
}

/// Encodes samples as 16-bit PCM mono. Values are clamped to the i16 range.
pub fn encode_wav(samples: &[f64], sample_rate: u32) -> Vec<u8> {
    let data_len = samples.len() * 2;
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&((36 + data_len) as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&sample_rate.to_le_bytes());
    out.extend_from_slice(&(sample_rate * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for &s in samples {
        let v = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header(format: u16, channels: u16, bits: u16, data: &[u8]) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(b"RIFF");
        out.extend_from_slice(&((36 + data.len()) as u32).to_le_bytes());
        out.extend_from_slice(b"WAVE");
        out.extend_from_slice(b"fmt ");
        out.extend_from_slice(&16u32.to_le_bytes());
        out.extend_from_slice(&format.to_le_bytes());
        out.extend_from_slice(&channels.to_le_bytes());
        out.extend_from_slice(&16000u32.to_le_bytes());
        out.extend_from_slice(&(16000u32 * u32::from(channels) * 2).to_le_bytes());
        out.extend_from_slice(&(channels * bits / 8).to_le_bytes());
        out.extend_from_slice(&bits.to_le_bytes());
        out.extend_from_slice(b"data");
        out.extend_from_slice(&(data.len() as u32).to_le_bytes());
        out.extend_from_slice(data);
        out
    }

    #[test]
    fn round_trips_160_samples() {
        let samples: Vec<f64> = (0..160).map(|i| ((i as f64) * 0.1).sin() * 0.5).collect();
        let audio = decode_wav(&encode_wav(&samples, 16000)).unwrap();
        assert_eq!(audio.samples.len(), 160);
        assert_eq!(audio.sample_rate, 16000);
        for (a, b) in audio.samples.iter().zip(&samples) {
            assert!((a - b).abs() <= 1.0 / 32768.0);
        }
    }

    #[test]
    fn max_sample_scaling() {
        let bytes = header(1, 1, 16, &0x7FFFi16.to_le_bytes());
        let audio = decode_wav(&bytes).unwrap();
        assert_eq!(audio.samples, vec![32767.0 / 32768.0]);
        let bytes = header(1, 1, 16, &i16::MIN.to_le_bytes());
        assert_eq!(decode_wav(&bytes).unwrap().samples, vec![-1.0]);
    }

    #[test]
    fn stereo_is_unsupported() {
        let bytes = header(1, 2, 16, &[0, 0, 0, 0]);
        assert!(matches!(decode_wav(&bytes), Err(Error::UnsupportedEncoding(_))));
    }

    #[test]
    fn float_and_8bit_are_unsupported() {
        assert!(matches!(
            decode_wav(&header(3, 1, 16, &[0, 0])),
            Err(Error::UnsupportedEncoding(_))
        ));
        assert!(matches!(
            decode_wav(&header(1, 1, 8, &[0, 0])),
            Err(Error::UnsupportedEncoding(_))
        ));
    }

    #[test]
    fn malformed_and_truncated_are_distinct() {
        assert!(matches!(decode_wav(b"RIFX0000WAVE"), Err(Error::MalformedHeader(_))));
        assert!(matches!(decode_wav(b"RIFF"), Err(Error::MalformedHeader(_))));

        let mut bytes = header(1, 1, 16, &[1, 0, 2, 0, 3, 0]);
        bytes.truncate(bytes.len() - 2);
        assert!(matches!(
            decode_wav(&bytes),
            Err(Error::TruncatedData { expected: 6, found: 4 })
        ));
    }

    #[test]
    fn skips_unknown_chunks() {
        let plain = header(1, 1, 16, &[1, 0]);
        let mut with_list = plain[..36].to_vec();
        with_list.extend_from_slice(b"LIST");
        with_list.extend_from_slice(&3u32.to_le_bytes());
        with_list.extend_from_slice(&[9, 9, 9, 0]);
        with_list.extend_from_slice(&plain[36..]);
        assert_eq!(decode_wav(&with_list).unwrap().samples.len(), 1);
    }
}
