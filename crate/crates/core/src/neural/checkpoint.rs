//! Binary tensor container plus JSON sidecar manifest.
//!
//! Layout: `COVGENCK`, u32 format version, u32 tensor count, then per tensor
//! a u32-length-prefixed UTF-8 name, u32 rank, u64 dims and little-endian f32
//! data. All integers are little-endian.

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::params::ParamStore;
use super::NeuralError;
use crate::io::atomic_write;

pub const MAGIC: &[u8; 8] = b"COVGENCK";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointManifest {
    pub format_version: u32,
    /// `generator` or `graph`.
    pub model: String,
    pub config_hash: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub vocabulary: Vec<String>,
    pub config: serde_json::Value,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn encode_tensors(tensors: &[Tensor]) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(tensors.len() as u32).to_le_bytes());
    for t in tensors {
        out.extend_from_slice(&(t.name.len() as u32).to_le_bytes());
        out.extend_from_slice(t.name.as_bytes());
        out.extend_from_slice(&(t.shape.len() as u32).to_le_bytes());
        for &d in &t.shape {
            out.extend_from_slice(&(d as u64).to_le_bytes());
        }
        for &x in &t.data {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], NeuralError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| NeuralError::Checkpoint(format!("truncated at byte {}", self.pos)))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, NeuralError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, NeuralError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn decode_tensors(bytes: &[u8]) -> Result<Vec<Tensor>, NeuralError> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err(NeuralError::Checkpoint("bad magic bytes".into()));
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(NeuralError::Checkpoint(format!("unsupported format version {version}")));
    }
    let count = r.u32()?;
    let mut out = Vec::new();
    for _ in 0..count {
        let len = r.u32()? as usize;
        let name = String::from_utf8(r.take(len)?.to_vec())
            .map_err(|_| NeuralError::Checkpoint("tensor name is not UTF-8".into()))?;
        let rank = r.u32()? as usize;
        let shape = (0..rank).map(|_| r.u64().map(|d| d as usize)).collect::<Result<Vec<_>, _>>()?;
        let n: usize = shape.iter().product();
        let raw = r.take(n.checked_mul(4).ok_or_else(|| NeuralError::Checkpoint("tensor too large".into()))?)?;
        let data = raw.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
        out.push(Tensor { name, shape, data });
    }
    if r.pos != bytes.len() {
        return Err(NeuralError::Checkpoint("trailing bytes after last tensor".into()));
    }
    Ok(out)
}

pub fn params_to_tensors(params: &ParamStore) -> Vec<Tensor> {
    params
        .ids()
        .map(|id| {
            let v = params.value(id);
            Tensor {
                name: params.name(id).to_string(),
                shape: vec![v.nrows(), v.ncols()],
                data: v.iter().map(|&x| x as f32).collect(),
            }
        })
        .collect()
}

/// Overwrites every parameter of `params` from same-named, same-shaped tensors.
pub fn load_params(params: &mut ParamStore, tensors: &[Tensor]) -> Result<(), NeuralError> {
    if tensors.len() != params.len() {
        return Err(NeuralError::Checkpoint(format!(
            "expected {} tensors, found {}",
            params.len(),
            tensors.len()
        )));
    }
    for t in tensors {
        let id = params
            .id(&t.name)
            .ok_or_else(|| NeuralError::Checkpoint(format!("unexpected tensor '{}'", t.name)))?;
        let dim = params.value(id).dim();
        if t.shape != [dim.0, dim.1] {
            return Err(NeuralError::Checkpoint(format!(
                "tensor '{}' has shape {:?}, expected {:?}",
                t.name, t.shape, dim
            )));
        }
        let v = Array2::from_shape_vec(dim, t.data.iter().map(|&x| f64::from(x)).collect())
            .map_err(|e| NeuralError::Checkpoint(e.to_string()))?;
        *params.value_mut(id) = v;
    }
    Ok(())
}

pub fn save_checkpoint(path: &Path, tensors: &[Tensor], manifest: &CheckpointManifest) -> Result<(), NeuralError> {
    let json = serde_json::to_string_pretty(manifest).map_err(|e| NeuralError::Checkpoint(e.to_string()))?;
    atomic_write(path, &encode_tensors(tensors)).map_err(|e| NeuralError::Io(format!("{}: {e}", path.display())))?;
    let side = sidecar_path(path);
    atomic_write(&side, format!("{json}\n").as_bytes()).map_err(|e| NeuralError::Io(format!("{}: {e}", side.display())))
}

pub fn load_checkpoint(path: &Path) -> Result<(Vec<Tensor>, CheckpointManifest), NeuralError> {
    let bytes = fs::read(path).map_err(|e| NeuralError::Io(format!("{}: {e}", path.display())))?;
    let side = sidecar_path(path);
    let text = fs::read_to_string(&side).map_err(|e| NeuralError::Io(format!("{}: {e}", side.display())))?;
    let manifest: CheckpointManifest =
        serde_json::from_str(&text).map_err(|e| NeuralError::Checkpoint(format!("{}: {e}", side.display())))?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(NeuralError::Checkpoint(format!("unsupported manifest version {}", manifest.format_version)));
    }
    Ok((decode_tensors(&bytes)?, manifest))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tensor_round_trip() {
        let ts = vec![
            Tensor { name: "a".into(), shape: vec![2, 3], data: vec![1.0, -2.5, 0.0, 3.25, 1e-7, 9.0] },
            Tensor { name: "bias".into(), shape: vec![1, 1], data: vec![0.5] },
        ];
        let bytes = encode_tensors(&ts);
        assert_eq!(&bytes[..8], MAGIC);
        assert_eq!(decode_tensors(&bytes).unwrap(), ts);
        assert!(decode_tensors(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode_tensors(&bad).is_err());
    }
}
