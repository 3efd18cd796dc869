//! `DPM1` binary checkpoints with a JSON sidecar.
//!
//! Layout: magic `DPM1`, u32 version, u32 tensor count, then per tensor a
//! u32 name length, the UTF-8 name, u32 rank, u32 dims and little-endian f32
//! values. Integers are little-endian.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::params::{Architecture, ModelParams, ParamSet};
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"DPM1";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Sidecar metadata stored next to a checkpoint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointMeta {
    pub num_classes: usize,
    pub input_dim: usize,
    pub hidden: usize,
    pub privileged_hidden: usize,
    pub privileged_dim: Option<usize>,
    pub activation: String,
    pub multimodal: bool,
}

impl CheckpointMeta {
    pub fn from_arch(arch: &Architecture) -> Self {
        Self {
            num_classes: arch.num_classes,
            input_dim: arch.input_dim,
            hidden: arch.hidden,
            privileged_hidden: arch.privileged_hidden,
            privileged_dim: arch.privileged_dim,
            activation: arch.activation.clone(),
            multimodal: arch.is_multimodal(),
        }
    }

    pub fn architecture(&self) -> Result<Architecture> {
        if self.multimodal != self.privileged_dim.is_some() {
            return Err(Error::MalformedCheckpoint(
                "multimodal flag disagrees with privileged dimension".into(),
            ));
        }
        Ok(Architecture {
            input_dim: self.input_dim,
            hidden: self.hidden,
            privileged_dim: self.privileged_dim,
            privileged_hidden: self.privileged_hidden,
            num_classes: self.num_classes,
            activation: self.activation.clone(),
        })
    }
}

/// Path of the sidecar for a checkpoint at `path`.
pub fn meta_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

pub fn encode_checkpoint(params: &ModelParams) -> Vec<u8> {
    let tensors = params.tensors.tensors();
    let mut out = Vec::with_capacity(12 + 4 * params.tensors.num_params() + 64 * tensors.len());
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    out.extend_from_slice(&(tensors.len() as u32).to_le_bytes());
    for (name, shape, values) in tensors {
        out.extend_from_slice(&(name.len() as u32).to_le_bytes());
        out.extend_from_slice(name.as_bytes());
        out.extend_from_slice(&(shape.len() as u32).to_le_bytes());
        for d in shape {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for &v in values {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::MalformedCheckpoint(format!("truncated at byte {} (need {n} more)", self.pos)))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

/// Decodes the binary part against a known architecture.
pub fn decode_checkpoint(bytes: &[u8], arch: Architecture) -> Result<ModelParams> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != CHECKPOINT_MAGIC {
        return Err(Error::MalformedCheckpoint("bad magic".into()));
    }
    let version = r.u32()?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::MalformedCheckpoint(format!("unsupported version {version}")));
    }
    let mut tensors = ParamSet::zeros(&arch);
    let expected: Vec<(&'static str, Vec<usize>)> = tensors.tensors().into_iter().map(|(n, s, _)| (n, s)).collect();
    let count = r.u32()? as usize;
    if count != expected.len() {
        return Err(Error::ShapeMismatch(format!(
            "checkpoint has {count} tensors, architecture has {}",
            expected.len()
        )));
    }
    for ((name, shape), (_, slot)) in expected.iter().zip(tensors.tensors_mut()) {
        let len = r.u32()? as usize;
        let found = std::str::from_utf8(r.take(len)?)
            .map_err(|_| Error::MalformedCheckpoint("tensor name is not UTF-8".into()))?;
        if found != *name {
            return Err(Error::MalformedCheckpoint(format!(
                "expected tensor `{name}`, found `{found}`"
            )));
        }
        let rank = r.u32()? as usize;
        let dims = (0..rank)
            .map(|_| r.u32().map(|d| d as usize))
            .collect::<Result<Vec<_>>>()?;
        if dims != *shape {
            return Err(Error::ShapeMismatch(format!(
                "tensor `{name}` has shape {dims:?}, architecture expects {shape:?}"
            )));
        }
        let data = r.take(4 * slot.len())?;
        for (dst, chunk) in slot.iter_mut().zip(data.chunks_exact(4)) {
            *dst = f32::from_le_bytes(chunk.try_into().unwrap()) as f64;
        }
    }
    if r.pos != bytes.len() {
        return Err(Error::MalformedCheckpoint("trailing bytes".into()));
    }
    ModelParams::from_tensors(arch, tensors)
}

/// Hex SHA-256 of the encoded checkpoint.
pub fn checkpoint_hash(params: &ModelParams) -> String {
    hex::encode(Sha256::digest(encode_checkpoint(params)))
}

/// Writes the checkpoint and its sidecar; returns the checkpoint hash.
pub fn save_checkpoint(params: &ModelParams, path: &Path) -> Result<String> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let bytes = encode_checkpoint(params);
    fs::write(path, &bytes).map_err(|e| Error::io(path, e))?;
    let meta = serde_json::to_string_pretty(&CheckpointMeta::from_arch(params.arch()))?;
    let mp = meta_path(path);
    fs::write(&mp, meta).map_err(|e| Error::io(&mp, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Reads a checkpoint and its sidecar; returns the parameters and hash.
pub fn load_checkpoint(path: &Path) -> Result<(ModelParams, String)> {
    let mp = meta_path(path);
    let meta_text = fs::read_to_string(&mp).map_err(|e| Error::io(&mp, e))?;
    let meta: CheckpointMeta =
        serde_json::from_str(&meta_text).map_err(|e| Error::MalformedCheckpoint(format!("{}: {e}", mp.display())))?;
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let params = decode_checkpoint(&bytes, meta.architecture()?)?;
    Ok((params, hex::encode(Sha256::digest(&bytes))))
}
