//! Run-length coding of 8-bit rasters.
//!
//! Wire form: a flat sequence of 5-byte records, each a little-endian `u32`
//! run length followed by the `u8` sample value.

use super::{BinaryMask, SketchFrame};
use crate::{Error, Result};

pub const RUN_BYTES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Run {
    pub length: u32,
    pub value: u8,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct RleBlock {
    pub runs: Vec<Run>,
}

impl RleBlock {
    /// Canonical runs of a sample sequence: no empty runs, and neighbours
    /// always differ in value unless a run had to be split at `u32::MAX`.
    pub fn from_samples(samples: &[u8]) -> Self {
        let mut runs: Vec<Run> = Vec::new();
        for &value in samples {
            match runs.last_mut() {
                Some(run) if run.value == value && run.length < u32::MAX => run.length += 1,
                _ => runs.push(Run { length: 1, value }),
            }
        }
        RleBlock { runs }
    }

    pub fn total_len(&self) -> u64 {
        self.runs.iter().map(|r| r.length as u64).sum()
    }

    pub fn is_canonical(&self) -> bool {
        self.runs.iter().all(|r| r.length > 0)
            && self
                .runs
                .windows(2)
                .all(|w| w[0].value != w[1].value || w[0].length == u32::MAX)
    }

    /// Expand into exactly `len` samples.
    pub fn expand(&self, len: usize) -> Result<Vec<u8>> {
        let total = self.total_len();
        if total != len as u64 {
            return Err(Error::CorruptPayload(format!(
                "run lengths sum to {total}, expected {len}"
            )));
        }
        let mut out = Vec::with_capacity(len);
        for run in &self.runs {
            if run.length == 0 {
                return Err(Error::CorruptPayload("zero-length run".into()));
            }
            out.resize(out.len() + run.length as usize, run.value);
        }
        Ok(out)
    }

    pub fn encoded_len(&self) -> usize {
        self.runs.len() * RUN_BYTES
    }

    pub fn write_to(&self, out: &mut Vec<u8>) {
        out.reserve(self.encoded_len());
        for run in &self.runs {
            out.extend_from_slice(&run.length.to_le_bytes());
            out.push(run.value);
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if !bytes.len().is_multiple_of(RUN_BYTES) {
            return Err(Error::CorruptPayload(format!(
                "RLE payload of {} bytes is not a whole number of runs",
                bytes.len()
            )));
        }
        let runs = bytes
            .chunks_exact(RUN_BYTES)
            .map(|c| Run {
                length: u32::from_le_bytes([c[0], c[1], c[2], c[3]]),
                value: c[4],
            })
            .collect();
        Ok(RleBlock { runs })
    }
}

pub fn rle_encode(raster: &SketchFrame) -> RleBlock {
    RleBlock::from_samples(raster.data())
}

pub fn rle_decode(block: &RleBlock, width: usize, height: usize) -> Result<SketchFrame> {
    let data = block.expand(width * height)?;
    SketchFrame::new(width, height, data)
}

/// Masks travel through the same codec with sample values {0, 1}.
pub fn rle_encode_mask(mask: &BinaryMask) -> RleBlock {
    RleBlock::from_samples(&mask.to_bytes())
}

pub fn rle_decode_mask(block: &RleBlock, width: usize, height: usize) -> Result<BinaryMask> {
    let data = block.expand(width * height)?;
    if let Some(v) = data.iter().find(|&&v| v > 1) {
        return Err(Error::CorruptPayload(format!(
            "mask sample {v} outside {{0,1}}"
        )));
    }
    BinaryMask::from_bytes(width, height, &data)
}
