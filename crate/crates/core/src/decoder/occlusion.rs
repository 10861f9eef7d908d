use super::{warp_sketch, BorderPolicy, FlowField};
use crate::imaging::{Frame, SketchFrame};
use crate::{Error, Result};

/// Per-pixel blend weight in [0, 1]: 1 takes the freshly generated pixel,
/// 0 keeps the warped history.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftMask {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f32>,
}

impl SoftMask {
    pub fn filled(width: usize, height: usize, value: f32) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn new(width: usize, height: usize, values: Vec<f32>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::BufferLength {
                expected: width * height,
                actual: values.len(),
            });
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::CorruptPayload(format!(
                "soft mask value {v} outside [0, 1]"
            )));
        }
        Ok(SoftMask {
            width,
            height,
            values,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

pub trait OcclusionEstimator: Send + Sync {
    fn predict(
        &self,
        history: &[Frame],
        sketches: &[SketchFrame],
        flow: &FlowField,
    ) -> Result<SoftMask>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ConstantOne;

impl OcclusionEstimator for ConstantOne {
    fn predict(
        &self,
        _history: &[Frame],
        sketches: &[SketchFrame],
        flow: &FlowField,
    ) -> Result<SoftMask> {
        if let Some(s) = sketches.last() {
            Error::check_dims(flow.dims(), s.dims())?;
        }
        SoftMask::filled(flow.width, flow.height, 1.0)
    }
}

/// Marks pixels where the previous sketch, warped by the flow, disagrees
/// with the current sketch, grown by a square dilation.
#[derive(Debug, Clone, Copy)]
pub struct SketchDisagreement {
    pub dilation_radius: usize,
    pub border: BorderPolicy,
}

impl Default for SketchDisagreement {
    fn default() -> Self {
        SketchDisagreement {
            dilation_radius: 2,
            border: BorderPolicy::Clamp,
        }
    }
}

pub(crate) fn dilate(set: &[bool], w: usize, h: usize, radius: usize) -> Vec<bool> {
    if radius == 0 {
        return set.to_vec();
    }
    // separable max filter
    let mut rows = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            let lo = x.saturating_sub(radius);
            let hi = (x + radius).min(w - 1);
            rows[y * w + x] = (lo..=hi).any(|xx| set[y * w + xx]);
        }
    }
    let mut out = vec![false; w * h];
    for y in 0..h {
        let lo = y.saturating_sub(radius);
        let hi = (y + radius).min(h - 1);
        for x in 0..w {
            out[y * w + x] = (lo..=hi).any(|yy| rows[yy * w + x]);
        }
    }
    out
}

impl OcclusionEstimator for SketchDisagreement {
    fn predict(
        &self,
        _history: &[Frame],
        sketches: &[SketchFrame],
        flow: &FlowField,
    ) -> Result<SoftMask> {
        if sketches.len() < 2 {
            return Err(Error::Protocol(
                "occlusion estimation needs the previous and current sketches".into(),
            ));
        }
        let cur = &sketches[sketches.len() - 1];
        let prev = &sketches[sketches.len() - 2];
        Error::check_dims(cur.dims(), prev.dims())?;
        Error::check_dims(cur.dims(), flow.dims())?;
        let warped = warp_sketch(prev, flow, self.border)?.binarized();
        let cur = cur.binarized();
        let (w, h) = cur.dims();
        let differs: Vec<bool> = warped
            .data()
            .iter()
            .zip(cur.data())
            .map(|(a, b)| a != b)
            .collect();
        let values = dilate(&differs, w, h, self.dilation_radius)
            .into_iter()
            .map(|d| if d { 1.0 } else { 0.0 })
            .collect();
        SoftMask::new(w, h, values)
    }
}
