//! Raw tensor files for plugging externally computed estimator outputs or
//! weights into the decoder.
//!
//! A tensor is stored as a flat little-endian `f32` payload next to a TOML
//! sidecar with the same stem:
//!
//! ```toml
//! role = "flow"
//! shape = [2, 128, 256]
//! dtype = "f32le"
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::decoder::{FeatureMap, FlowField, SoftMask};
use crate::{Error, Result};

pub const DTYPE: &str = "f32le";

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub role: String,
    pub shape: Vec<usize>,
    pub data: Vec<f32>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Sidecar {
    role: String,
    shape: Vec<usize>,
    dtype: String,
}

pub fn sidecar_path(payload: &Path) -> PathBuf {
    payload.with_extension("toml")
}

impl Tensor {
    pub fn new(role: impl Into<String>, shape: Vec<usize>, data: Vec<f32>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(Error::BufferLength {
                expected,
                actual: data.len(),
            });
        }
        Ok(Tensor {
            role: role.into(),
            shape,
            data,
        })
    }

    fn expect(&self, role: &str, rank: usize) -> Result<()> {
        if self.role != role || self.shape.len() != rank {
            return Err(Error::Protocol(format!(
                "expected a rank-{rank} '{role}' tensor, got rank-{} '{}'",
                self.shape.len(),
                self.role
            )));
        }
        Ok(())
    }
}

pub fn write_tensor(path: impl AsRef<Path>, tensor: &Tensor) -> Result<()> {
    let path = path.as_ref();
    let payload: Vec<u8> = tensor.data.iter().flat_map(|v| v.to_le_bytes()).collect();
    fs::write(path, payload).map_err(|e| Error::io(path, e))?;
    let sidecar = Sidecar {
        role: tensor.role.clone(),
        shape: tensor.shape.clone(),
        dtype: DTYPE.into(),
    };
    let side = sidecar_path(path);
    let text = toml::to_string(&sidecar).map_err(|e| Error::Sidecar {
        path: side.clone(),
        reason: e.to_string(),
    })?;
    fs::write(&side, text).map_err(|e| Error::io(&side, e))
}

pub fn read_tensor(path: impl AsRef<Path>) -> Result<Tensor> {
    let path = path.as_ref();
    let side = sidecar_path(path);
    let text = fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    let sidecar: Sidecar = toml::from_str(&text).map_err(|e| Error::Sidecar {
        path: side.clone(),
        reason: e.to_string(),
    })?;
    if sidecar.dtype != DTYPE {
        return Err(Error::Sidecar {
            path: side,
            reason: format!("unsupported dtype {:?}", sidecar.dtype),
        });
    }
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() % 4 != 0 {
        return Err(Error::CorruptPayload(format!(
            "{}: {} bytes is not a whole number of f32 values",
            path.display(),
            bytes.len()
        )));
    }
    let data = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    Tensor::new(sidecar.role, sidecar.shape, data)
}

impl From<&FlowField> for Tensor {
    fn from(flow: &FlowField) -> Self {
        let data = flow.dx.iter().chain(&flow.dy).copied().collect();
        Tensor {
            role: "flow".into(),
            shape: vec![2, flow.height, flow.width],
            data,
        }
    }
}

impl TryFrom<&Tensor> for FlowField {
    type Error = Error;

    fn try_from(t: &Tensor) -> Result<Self> {
        t.expect("flow", 3)?;
        if t.shape[0] != 2 {
            return Err(Error::Protocol(format!(
                "flow tensor needs 2 planes, got {}",
                t.shape[0]
            )));
        }
        let (h, w) = (t.shape[1], t.shape[2]);
        let (dx, dy) = t.data.split_at(w * h);
        FlowField::new(w, h, dx.to_vec(), dy.to_vec())
    }
}

impl From<&SoftMask> for Tensor {
    fn from(m: &SoftMask) -> Self {
        Tensor {
            role: "occlusion".into(),
            shape: vec![m.height, m.width],
            data: m.values.clone(),
        }
    }
}

impl TryFrom<&Tensor> for SoftMask {
    type Error = Error;

    fn try_from(t: &Tensor) -> Result<Self> {
        t.expect("occlusion", 2)?;
        SoftMask::new(t.shape[1], t.shape[0], t.data.clone())
    }
}

impl From<&FeatureMap> for Tensor {
    fn from(f: &FeatureMap) -> Self {
        Tensor {
            role: "features".into(),
            shape: vec![f.channels, f.height, f.width],
            data: f.values.iter().map(|&v| v as f32).collect(),
        }
    }
}

impl TryFrom<&Tensor> for FeatureMap {
    type Error = Error;

    fn try_from(t: &Tensor) -> Result<Self> {
        t.expect("features", 3)?;
        let values = t.data.iter().map(|&v| v as f64).collect();
        FeatureMap::new(t.shape[0], t.shape[1], t.shape[2], values)
    }
}
