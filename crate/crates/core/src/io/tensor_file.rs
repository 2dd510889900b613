//! `SPHOC\0v1` binary tensor layout: an 8-byte magic, then height, width and
//! channel count as little-endian `u32`, then `height·width·channels`
//! little-endian `f32` values, row-major with channels fastest.

use std::path::Path;

use crate::alphabet::NUM_CLASSES;
use crate::tensor::SoftPhocTensor;

use super::FormatError;

pub const MAGIC: &[u8; 8] = b"SPHOC\0v1";
const HEADER_LEN: usize = 8 + 3 * 4;

/// Serializes a tensor; values are stored as `f32`.
pub fn encode_tensor(t: &SoftPhocTensor) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + t.as_slice().len() * 4);
    out.extend_from_slice(MAGIC);
    for dim in [t.height(), t.width(), NUM_CLASSES] {
        out.extend_from_slice(&(dim as u32).to_le_bytes());
    }
    for v in t.as_slice() {
        out.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    out
}

pub fn decode_tensor(bytes: &[u8]) -> Result<SoftPhocTensor, FormatError> {
    if bytes.len() < HEADER_LEN {
        return Err(FormatError::Tensor(format!(
            "file is {} bytes, shorter than the {HEADER_LEN}-byte header",
            bytes.len()
        )));
    }
    if &bytes[..8] != MAGIC {
        return Err(FormatError::Tensor("bad magic".into()));
    }
    let dim = |i: usize| {
        let o = 8 + 4 * i;
        u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4-byte slice")) as usize
    };
    let (height, width, channels) = (dim(0), dim(1), dim(2));
    if channels != NUM_CLASSES {
        return Err(FormatError::Tensor(format!(
            "expected {NUM_CLASSES} channels, header says {channels}"
        )));
    }
    let count = height
        .checked_mul(width)
        .and_then(|n| n.checked_mul(channels))
        .ok_or_else(|| FormatError::Tensor("dimensions overflow".into()))?;
    let payload = &bytes[HEADER_LEN..];
    if Some(payload.len()) != count.checked_mul(4) {
        return Err(FormatError::Tensor(format!(
            "payload is {} bytes, header implies {}",
            payload.len(),
            count.saturating_mul(4)
        )));
    }
    let data = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4-byte chunk")) as f64)
        .collect();
    SoftPhocTensor::from_vec(height, width, data).map_err(|e| FormatError::Tensor(e.to_string()))
}

pub fn write_tensor(path: &Path, t: &SoftPhocTensor) -> Result<(), FormatError> {
    std::fs::write(path, encode_tensor(t)).map_err(|e| FormatError::io(path, e))
}

pub fn read_tensor(path: &Path) -> Result<SoftPhocTensor, FormatError> {
    let bytes = std::fs::read(path).map_err(|e| FormatError::io(path, e))?;
    decode_tensor(&bytes)
}
