//! Classical edge detection producing binary line drawings.

use serde::{Deserialize, Serialize};

use crate::imaging::{Frame, SketchFrame, BACKGROUND, EDGE};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeOperator {
    /// Thinned Sobel magnitude thresholded at `high_threshold`.
    GradientMagnitude,
    /// Sobel magnitude, non-maximum suppression and two-threshold hysteresis.
    TwoThresholdHysteresis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EdgeExtractorConfig {
    pub operator: EdgeOperator,
    pub low_threshold: u8,
    pub high_threshold: u8,
    pub blur_radius: u32,
}

impl Default for EdgeExtractorConfig {
    fn default() -> Self {
        EdgeExtractorConfig {
            operator: EdgeOperator::TwoThresholdHysteresis,
            low_threshold: 25,
            high_threshold: 50,
            blur_radius: 1,
        }
    }
}

impl EdgeExtractorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.low_threshold > self.high_threshold {
            return Err(Error::InvalidConfig(format!(
                "edge low threshold {} exceeds high threshold {}",
                self.low_threshold, self.high_threshold
            )));
        }
        Ok(())
    }
}

/// Separable box blur with clamped borders.
pub(crate) fn box_blur(src: &[f64], w: usize, h: usize, radius: usize) -> Vec<f64> {
    if radius == 0 {
        return src.to_vec();
    }
    let norm = 1.0 / (2 * radius + 1) as f64;
    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for k in -(radius as isize)..=radius as isize {
                let xx = (x as isize + k).clamp(0, w as isize - 1) as usize;
                acc += src[y * w + xx];
            }
            tmp[y * w + x] = acc * norm;
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for k in -(radius as isize)..=radius as isize {
                let yy = (y as isize + k).clamp(0, h as isize - 1) as usize;
                acc += tmp[yy * w + x];
            }
            out[y * w + x] = acc * norm;
        }
    }
    out
}

/// Sobel responses, normalized so a sharp 0→255 step has magnitude 255.
fn sobel(img: &[f64], w: usize, h: usize) -> (Vec<f64>, Vec<f64>) {
    let at = |x: isize, y: isize| {
        let xx = x.clamp(0, w as isize - 1) as usize;
        let yy = y.clamp(0, h as isize - 1) as usize;
        img[yy * w + xx]
    };
    let mut gx = vec![0.0; w * h];
    let mut gy = vec![0.0; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let i = y as usize * w + x as usize;
            gx[i] = ((at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1)))
                / 4.0;
            gy[i] = ((at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1)))
                / 4.0;
        }
    }
    (gx, gy)
}

fn non_max_suppression(mag: &[f64], gx: &[f64], gy: &[f64], w: usize, h: usize) -> Vec<f64> {
    let mut out = vec![0.0; w * h];
    let at = |x: isize, y: isize| {
        if x < 0 || y < 0 || x >= w as isize || y >= h as isize {
            0.0
        } else {
            mag[y as usize * w + x as usize]
        }
    };
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let m = mag[i];
            if m == 0.0 {
                continue;
            }
            // quantize the gradient direction to one of four neighbour axes
            let angle = gy[i].atan2(gx[i]).to_degrees().rem_euclid(180.0);
            let (dx, dy): (isize, isize) = if !(22.5..157.5).contains(&angle) {
                (1, 0)
            } else if angle < 67.5 {
                (1, 1)
            } else if angle < 112.5 {
                (0, 1)
            } else {
                (-1, 1)
            };
            let (xi, yi) = (x as isize, y as isize);
            if m >= at(xi + dx, yi + dy) && m >= at(xi - dx, yi - dy) {
                out[i] = m;
            }
        }
    }
    out
}

fn hysteresis(mag: &[f64], w: usize, h: usize, low: f64, high: f64) -> Vec<bool> {
    let mut edge = vec![false; w * h];
    let mut stack: Vec<usize> = (0..w * h)
        .filter(|&i| mag[i] >= high && mag[i] > 0.0)
        .collect();
    for &i in &stack {
        edge[i] = true;
    }
    while let Some(i) = stack.pop() {
        let (x, y) = ((i % w) as isize, (i / w) as isize);
        for dy in -1..=1 {
            for dx in -1..=1 {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if !edge[j] && mag[j] >= low && mag[j] > 0.0 {
                    edge[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    edge
}

/// Binary line drawing of a frame: 255 on edges, 0 elsewhere.
pub fn extract_sketch(frame: &Frame, cfg: &EdgeExtractorConfig) -> Result<SketchFrame> {
    cfg.validate()?;
    let (w, h) = frame.dims();
    let luma = box_blur(&frame.luma(), w, h, cfg.blur_radius as usize);
    let (gx, gy) = sobel(&luma, w, h);
    let mag: Vec<f64> = gx.iter().zip(&gy).map(|(a, b)| a.hypot(*b)).collect();
    let (low, high) = (cfg.low_threshold as f64, cfg.high_threshold as f64);
    let thin = non_max_suppression(&mag, &gx, &gy, w, h);
    let edge = match cfg.operator {
        EdgeOperator::GradientMagnitude => thin.iter().map(|&m| m > 0.0 && m >= high).collect(),
        EdgeOperator::TwoThresholdHysteresis => hysteresis(&thin, w, h, low, high),
    };
    let data = edge
        .into_iter()
        .map(|e| if e { EDGE } else { BACKGROUND })
        .collect();
    SketchFrame::new(w, h, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step(w: usize, h: usize, c: usize) -> Frame {
        let mut f = Frame::filled(w, h, [0, 0, 0]).unwrap();
        for y in 0..h {
            for x in c..w {
                f.set_pixel(x, y, [255, 255, 255]);
            }
        }
        f
    }

    fn configs() -> Vec<EdgeExtractorConfig> {
        let mut out = Vec::new();
        for operator in [
            EdgeOperator::GradientMagnitude,
            EdgeOperator::TwoThresholdHysteresis,
        ] {
            for blur_radius in [0, 1] {
                out.push(EdgeExtractorConfig {
                    operator,
                    blur_radius,
                    ..Default::default()
                });
            }
        }
        out
    }

    #[test]
    fn constant_frame_has_no_edges() {
        let f = Frame::filled(20, 10, [90, 30, 200]).unwrap();
        for cfg in configs() {
            assert_eq!(extract_sketch(&f, &cfg).unwrap().edge_count(), 0);
        }
    }

    #[test]
    fn step_edges_sit_on_the_step() {
        let c = 9;
        let f = step(20, 12, c);
        for cfg in configs() {
            let s = extract_sketch(&f, &cfg).unwrap();
            assert!(s.edge_count() > 0, "{cfg:?}");
            for y in 0..12 {
                for x in 0..20 {
                    if s.get(x, y) == EDGE {
                        assert!(x.abs_diff(c) <= 1, "{cfg:?}: edge at column {x}");
                    } else {
                        assert_eq!(s.get(x, y), 0);
                    }
                }
            }
        }
    }

    #[test]
    fn checkerboard_has_edges() {
        let mut f = Frame::filled(16, 16, [0, 0, 0]).unwrap();
        for y in 0..16 {
            for x in 0..16 {
                if (x / 2 + y / 2) % 2 == 0 {
                    f.set_pixel(x, y, [255, 255, 255]);
                }
            }
        }
        for cfg in configs() {
            assert!(extract_sketch(&f, &cfg).unwrap().edge_count() > 0);
        }
    }

    #[test]
    fn rejects_inverted_thresholds() {
        let cfg = EdgeExtractorConfig {
            low_threshold: 120,
            high_threshold: 60,
            ..Default::default()
        };
        assert!(extract_sketch(&Frame::filled(2, 2, [0; 3]).unwrap(), &cfg).is_err());
    }

    #[test]
    fn box_blur_preserves_constants() {
        let img = vec![7.0; 30];
        assert!(box_blur(&img, 6, 5, 2)
            .iter()
            .all(|&v| (v - 7.0).abs() < 1e-12));
    }
}
