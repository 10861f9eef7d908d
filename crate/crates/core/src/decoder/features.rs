//! Fixed filter-bank features standing in for learned encoders.

use crate::codec::edges::box_blur as edges_box_blur;
use crate::imaging::{Frame, SketchFrame};
use crate::{Error, Result};

/// Channel-major float feature map (`values[c][y * width + x]` flattened).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
    pub values: Vec<f64>,
}

impl FeatureMap {
    pub fn new(channels: usize, height: usize, width: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != channels * height * width {
            return Err(Error::BufferLength {
                expected: channels * height * width,
                actual: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::CorruptPayload(
                "feature map contains non-finite values".into(),
            ));
        }
        Ok(FeatureMap {
            channels,
            height,
            width,
            values,
        })
    }

    pub fn zeros(channels: usize, height: usize, width: usize) -> Self {
        FeatureMap {
            channels,
            height,
            width,
            values: vec![0.0; channels * height * width],
        }
    }

    pub fn positions(&self) -> usize {
        self.height * self.width
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        let n = self.positions();
        &self.values[c * n..(c + 1) * n]
    }

    pub fn channel_mut(&mut self, c: usize) -> &mut [f64] {
        let n = self.positions();
        &mut self.values[c * n..(c + 1) * n]
    }

    pub fn get(&self, c: usize, position: usize) -> f64 {
        self.values[c * self.positions() + position]
    }

    /// The channel vector at one position.
    pub fn vector(&self, position: usize) -> Vec<f64> {
        (0..self.channels).map(|c| self.get(c, position)).collect()
    }

    /// RGB frame as a 3-channel map scaled to [0, 1].
    pub fn from_frame_rgb(frame: &Frame) -> Self {
        let (w, h) = frame.dims();
        let mut values = vec![0.0; 3 * w * h];
        for (i, px) in frame.data().chunks_exact(3).enumerate() {
            for c in 0..3 {
                values[c * w * h + i] = px[c] as f64 / 255.0;
            }
        }
        FeatureMap {
            channels: 3,
            height: h,
            width: w,
            values,
        }
    }

    /// Back to an 8-bit frame; values are clamped to [0, 1] and rounded half-to-even.
    pub fn to_frame(&self) -> Result<Frame> {
        if self.channels != 3 {
            return Err(Error::ChannelMismatch(self.channels, 3));
        }
        let n = self.positions();
        let mut data = vec![0u8; 3 * n];
        for i in 0..n {
            for c in 0..3 {
                data[i * 3 + c] = quantize(self.values[c * n + i]);
            }
        }
        Frame::new(self.width, self.height, data)
    }

    /// Average-pool each channel over `scale`×`scale` cells; edge cells
    /// average only the samples that exist.
    pub fn pooled(&self, scale: usize) -> FeatureMap {
        let (w, h) = (self.width, self.height);
        let (pw, ph) = (w.div_ceil(scale), h.div_ceil(scale));
        let mut out = FeatureMap::zeros(self.channels, ph, pw);
        for c in 0..self.channels {
            let src = self.channel(c);
            let dst = out.channel_mut(c);
            for py in 0..ph {
                for px in 0..pw {
                    let (y0, y1) = (py * scale, ((py + 1) * scale).min(h));
                    let (x0, x1) = (px * scale, ((px + 1) * scale).min(w));
                    let mut acc = 0.0;
                    for y in y0..y1 {
                        for x in x0..x1 {
                            acc += src[y * w + x];
                        }
                    }
                    dst[py * pw + px] = acc / ((y1 - y0) * (x1 - x0)) as f64;
                }
            }
        }
        out
    }

    /// Bilinear resize to `width`×`height` with pixel-center alignment.
    pub fn upsampled(&self, width: usize, height: usize) -> FeatureMap {
        let sx = self.width as f64 / width as f64;
        let sy = self.height as f64 / height as f64;
        let coord = |dst: usize, scale: f64, len: usize| {
            let s = ((dst as f64 + 0.5) * scale - 0.5).clamp(0.0, (len - 1) as f64);
            let i0 = s.floor() as usize;
            let i1 = (i0 + 1).min(len - 1);
            (i0, i1, s - i0 as f64)
        };
        let xs: Vec<_> = (0..width).map(|x| coord(x, sx, self.width)).collect();
        let ys: Vec<_> = (0..height).map(|y| coord(y, sy, self.height)).collect();
        let mut out = FeatureMap::zeros(self.channels, height, width);
        for c in 0..self.channels {
            let src = self.channel(c);
            let dst = out.channel_mut(c);
            for (y, &(y0, y1, fy)) in ys.iter().enumerate() {
                for (x, &(x0, x1, fx)) in xs.iter().enumerate() {
                    let top =
                        src[y0 * self.width + x0] * (1.0 - fx) + src[y0 * self.width + x1] * fx;
                    let bottom =
                        src[y1 * self.width + x0] * (1.0 - fx) + src[y1 * self.width + x1] * fx;
                    dst[y * width + x] = top * (1.0 - fy) + bottom * fy;
                }
            }
        }
        out
    }
}

pub(crate) fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round_ties_even() as u8
}

/// Anything the filter bank can read: an intensity plane in [0, 1].
pub trait FeatureSource {
    fn dims(&self) -> (usize, usize);
    fn intensity(&self) -> Vec<f64>;
}

impl FeatureSource for Frame {
    fn dims(&self) -> (usize, usize) {
        Frame::dims(self)
    }

    fn intensity(&self) -> Vec<f64> {
        self.luma().into_iter().map(|v| v / 255.0).collect()
    }
}

impl FeatureSource for SketchFrame {
    fn dims(&self) -> (usize, usize) {
        SketchFrame::dims(self)
    }

    fn intensity(&self) -> Vec<f64> {
        self.data().iter().map(|&v| v as f64 / 255.0).collect()
    }
}

pub const FEATURE_CHANNELS: usize = 5;

/// Five channels at `1/scale` resolution: pooled intensity, its horizontal
/// and vertical central differences, and box blurs of radius 1 and 2.
pub fn extract_features(image: &impl FeatureSource, scale: usize) -> Result<FeatureMap> {
    if scale == 0 {
        return Err(Error::InvalidConfig(
            "feature scale must be positive".into(),
        ));
    }
    let (w, h) = image.dims();
    let full = FeatureMap {
        channels: 1,
        height: h,
        width: w,
        values: image.intensity(),
    };
    let base = full.pooled(scale);
    let (pw, ph) = (base.width, base.height);
    let i = base.channel(0);
    let at = |x: isize, y: isize| {
        i[y.clamp(0, ph as isize - 1) as usize * pw + x.clamp(0, pw as isize - 1) as usize]
    };
    let mut gx = vec![0.0; pw * ph];
    let mut gy = vec![0.0; pw * ph];
    for y in 0..ph as isize {
        for x in 0..pw as isize {
            let k = y as usize * pw + x as usize;
            gx[k] = (at(x + 1, y) - at(x - 1, y)) / 2.0;
            gy[k] = (at(x, y + 1) - at(x, y - 1)) / 2.0;
        }
    }
    let blur1 = edges_box_blur(i, pw, ph, 1);
    let blur2 = edges_box_blur(i, pw, ph, 2);
    let mut values = Vec::with_capacity(FEATURE_CHANNELS * pw * ph);
    for ch in [i, &gx[..], &gy[..], &blur1[..], &blur2[..]] {
        values.extend_from_slice(ch);
    }
    FeatureMap::new(FEATURE_CHANNELS, ph, pw, values)
}
