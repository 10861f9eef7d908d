use serde::{Deserialize, Serialize};

use super::FlowField;
use crate::imaging::{Frame, SketchFrame};
use crate::{Error, Result};

/// How samples outside the source raster are read.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BorderPolicy {
    /// Repeat the nearest edge sample.
    #[default]
    Clamp,
    /// Treat outside samples as 0.
    Zero,
}

/// Backward bilinear warp of an interleaved plane: output(p) = src(p + flow(p)).
fn warp_plane(
    src: &[u8],
    channels: usize,
    (w, h): (usize, usize),
    flow: &FlowField,
    border: BorderPolicy,
) -> Vec<u8> {
    let mut out = vec![0u8; src.len()];
    let tap = |x: isize, y: isize, c: usize| -> f64 {
        let inside = x >= 0 && y >= 0 && x < w as isize && y < h as isize;
        if !inside && border == BorderPolicy::Zero {
            return 0.0;
        }
        let xx = x.clamp(0, w as isize - 1) as usize;
        let yy = y.clamp(0, h as isize - 1) as usize;
        src[(yy * w + xx) * channels + c] as f64
    };
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let sx = x as f64 + flow.dx[i] as f64;
            let sy = y as f64 + flow.dy[i] as f64;
            let (x0, y0) = (sx.floor(), sy.floor());
            let (fx, fy) = (sx - x0, sy - y0);
            let (x0, y0) = (x0 as isize, y0 as isize);
            for c in 0..channels {
                let mut v = (1.0 - fx) * (1.0 - fy) * tap(x0, y0, c);
                if fx > 0.0 {
                    v += fx * (1.0 - fy) * tap(x0 + 1, y0, c);
                }
                if fy > 0.0 {
                    v += (1.0 - fx) * fy * tap(x0, y0 + 1, c);
                }
                if fx > 0.0 && fy > 0.0 {
                    v += fx * fy * tap(x0 + 1, y0 + 1, c);
                }
                out[i * channels + c] = v.round_ties_even().clamp(0.0, 255.0) as u8;
            }
        }
    }
    out
}

pub fn warp(frame: &Frame, flow: &FlowField, border: BorderPolicy) -> Result<Frame> {
    Error::check_dims(frame.dims(), flow.dims())?;
    let data = warp_plane(frame.data(), Frame::CHANNELS, frame.dims(), flow, border);
    Frame::new(frame.width(), frame.height(), data)
}

pub fn warp_sketch(
    sketch: &SketchFrame,
    flow: &FlowField,
    border: BorderPolicy,
) -> Result<SketchFrame> {
    Error::check_dims(sketch.dims(), flow.dims())?;
    let data = warp_plane(sketch.data(), 1, sketch.dims(), flow, border);
    SketchFrame::new(sketch.width(), sketch.height(), data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn noise_frame(w: usize, h: usize, seed: u32) -> Frame {
        let data = (0..w * h * 3)
            .map(|i| ((i as u32).wrapping_mul(2654435761).wrapping_add(seed) >> 24) as u8)
            .collect();
        Frame::new(w, h, data).unwrap()
    }

    #[test]
    fn zero_flow_is_identity() {
        let f = noise_frame(11, 7, 3);
        for border in [BorderPolicy::Clamp, BorderPolicy::Zero] {
            assert_eq!(warp(&f, &FlowField::zeros(11, 7), border).unwrap(), f);
        }
    }

    #[test]
    fn integer_shift_matches_index_arithmetic() {
        let (w, h) = (9, 5);
        let f = noise_frame(w, h, 77);
        let out = warp(&f, &FlowField::uniform(w, h, 1.0, 0.0), BorderPolicy::Clamp).unwrap();
        for y in 0..h {
            for x in 0..w {
                assert_eq!(out.pixel(x, y), f.pixel((x + 1).min(w - 1), y));
            }
        }
        let out = warp(&f, &FlowField::uniform(w, h, -2.0, 1.0), BorderPolicy::Zero).unwrap();
        for y in 0..h {
            for x in 0..w {
                let expected = if x >= 2 && y + 1 < h {
                    f.pixel(x - 2, y + 1)
                } else {
                    [0; 3]
                };
                assert_eq!(out.pixel(x, y), expected);
            }
        }
    }

    #[test]
    fn half_pixel_shift_gives_midpoint() {
        let mut f = Frame::filled(2, 1, [0, 0, 0]).unwrap();
        f.set_pixel(1, 0, [255, 255, 255]);
        let out = warp(&f, &FlowField::uniform(2, 1, 0.5, 0.0), BorderPolicy::Clamp).unwrap();
        // 127.5 rounds half-to-even
        assert_eq!(out.pixel(0, 0), [128, 128, 128]);
        assert_eq!(out.pixel(1, 0), [255, 255, 255]);
    }

    #[test]
    fn dimension_mismatch() {
        let f = noise_frame(4, 4, 0);
        assert!(warp(&f, &FlowField::zeros(4, 3), BorderPolicy::Clamp).is_err());
    }

    proptest! {
        #[test]
        fn warp_is_linear_within_rounding(
            seed in any::<u32>(),
            dx in -3.0f32..3.0,
            dy in -3.0f32..3.0,
        ) {
            let (w, h) = (8, 6);
            let halve = |f: Frame| Frame::new(w, h, f.data().iter().map(|v| v / 2).collect()).unwrap();
            let a = halve(noise_frame(w, h, seed));
            let b = halve(noise_frame(w, h, seed ^ 0x9e37));
            let sum = Frame::new(w, h, a.data().iter().zip(b.data()).map(|(x, y)| x + y).collect()).unwrap();
            let flow = FlowField::uniform(w, h, dx, dy);
            let wa = warp(&a, &flow, BorderPolicy::Clamp).unwrap();
            let wb = warp(&b, &flow, BorderPolicy::Clamp).unwrap();
            let ws = warp(&sum, &flow, BorderPolicy::Clamp).unwrap();
            for i in 0..ws.data().len() {
                let lhs = ws.data()[i] as i32;
                let rhs = wa.data()[i] as i32 + wb.data()[i] as i32;
                prop_assert!((lhs - rhs).abs() <= 1);
            }
        }
    }
}
