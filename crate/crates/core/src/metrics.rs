//! Full-reference quality metrics and container size accounting.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codec::{encode_container, encode_sketch_container, MaskedSketchVideo, SketchVideo};
use crate::imaging::io::encode_png;
use crate::imaging::Frame;
use crate::{Error, Result};

/// Reported instead of infinity when two frames are identical.
pub const PSNR_CAP: f64 = 99.0;

pub fn mse(a: &Frame, b: &Frame) -> Result<f64> {
    Error::check_dims(a.dims(), b.dims())?;
    let sum: u64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| {
            let d = x.abs_diff(y) as u64;
            d * d
        })
        .sum();
    Ok(sum as f64 / a.data().len() as f64)
}

/// Peak signal-to-noise ratio over all channels, in dB.
pub fn psnr(a: &Frame, b: &Frame) -> Result<f64> {
    let mse = mse(a, b)?;
    if mse == 0.0 {
        return Ok(PSNR_CAP);
    }
    Ok((10.0 * (255.0f64 * 255.0 / mse).log10()).min(PSNR_CAP))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SsimConfig {
    pub k1: f64,
    pub k2: f64,
    pub dynamic_range: f64,
    pub window: usize,
}

impl Default for SsimConfig {
    fn default() -> Self {
        SsimConfig {
            k1: 0.01,
            k2: 0.03,
            dynamic_range: 255.0,
            window: 8,
        }
    }
}

/// Summed-area table with a zero guard row and column.
fn integral(plane: &[f64], w: usize, h: usize) -> Vec<f64> {
    let mut out = vec![0.0; (w + 1) * (h + 1)];
    for y in 0..h {
        let mut row = 0.0;
        for x in 0..w {
            row += plane[y * w + x];
            out[(y + 1) * (w + 1) + x + 1] = out[y * (w + 1) + x + 1] + row;
        }
    }
    out
}

fn window_sum(table: &[f64], w: usize, x: usize, y: usize, n: usize) -> f64 {
    let s = w + 1;
    table[(y + n) * s + x + n] - table[y * s + x + n] - table[(y + n) * s + x] + table[y * s + x]
}

/// Mean SSIM over every `window`×`window` luma window at stride 1, with
/// uniform weights and population moments.
pub fn ssim(a: &Frame, b: &Frame, cfg: &SsimConfig) -> Result<f64> {
    Error::check_dims(a.dims(), b.dims())?;
    let (w, h) = a.dims();
    let n = cfg.window;
    if n == 0 || w < n || h < n {
        return Err(Error::InvalidDimensions {
            width: w,
            height: h,
        });
    }
    let (la, lb) = (a.luma(), b.luma());
    let sq = |p: &[f64]| p.iter().map(|v| v * v).collect::<Vec<_>>();
    let cross: Vec<f64> = la.iter().zip(&lb).map(|(x, y)| x * y).collect();
    let tables = [
        integral(&la, w, h),
        integral(&lb, w, h),
        integral(&sq(&la), w, h),
        integral(&sq(&lb), w, h),
        integral(&cross, w, h),
    ];
    let c1 = (cfg.k1 * cfg.dynamic_range).powi(2);
    let c2 = (cfg.k2 * cfg.dynamic_range).powi(2);
    let area = (n * n) as f64;
    let mut total = 0.0;
    for y in 0..=h - n {
        for x in 0..=w - n {
            let [sa, sb, saa, sbb, sab] =
                tables.each_ref().map(|t| window_sum(t, w, x, y, n) / area);
            let var_a = (saa - sa * sa).max(0.0);
            let var_b = (sbb - sb * sb).max(0.0);
            let cov = sab - sa * sb;
            total += ((2.0 * sa * sb + c1) * (2.0 * cov + c2))
                / ((sa * sa + sb * sb + c1) * (var_a + var_b + c2));
        }
    }
    Ok(total / ((w - n + 1) * (h - n + 1)) as f64)
}

/// Metrics that need pretrained perceptual networks are never approximated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unavailable {
    #[default]
    Unavailable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameQuality {
    pub psnr: f64,
    pub ssim: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub frame_count: usize,
    pub mean_psnr: f64,
    pub mean_ssim: f64,
    pub frames: Vec<FrameQuality>,
    pub kid: Unavailable,
    pub lpips: Unavailable,
}

pub fn evaluate_video(
    original: &[Frame],
    decoded: &[Frame],
    cfg: &SsimConfig,
) -> Result<QualityReport> {
    if original.len() != decoded.len() {
        return Err(Error::Protocol(format!(
            "frame count mismatch: {} original vs {} decoded",
            original.len(),
            decoded.len()
        )));
    }
    if original.is_empty() {
        return Err(Error::Protocol("no frames to evaluate".into()));
    }
    let frames = original
        .par_iter()
        .zip(decoded)
        .map(|(a, b)| {
            Ok(FrameQuality {
                psnr: psnr(a, b)?,
                ssim: ssim(a, b, cfg)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    // sequential reduction keeps the means bit-stable
    let n = frames.len() as f64;
    let mean_psnr = frames.iter().map(|f| f.psnr).sum::<f64>() / n;
    let mean_ssim = frames.iter().map(|f| f.ssim).sum::<f64>() / n;
    Ok(QualityReport {
        frame_count: frames.len(),
        mean_psnr,
        mean_ssim,
        frames,
        kid: Unavailable::Unavailable,
        lpips: Unavailable::Unavailable,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SizeReport {
    /// Every raw frame as a PNG payload.
    pub raw_size: u64,
    /// Full sketch video plus reference frame in the container format.
    pub sketch_size: u64,
    /// The masked container as transmitted.
    pub masked_size: u64,
    pub masked_to_sketch: f64,
    pub masked_to_raw: f64,
}

pub fn size_report(
    raw: &[Frame],
    sketch: &SketchVideo,
    masked: &MaskedSketchVideo,
) -> Result<SizeReport> {
    let raw_size = raw
        .par_iter()
        .map(|f| encode_png(f).map(|b| b.len() as u64))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum();
    let sketch_size = encode_sketch_container(sketch, &masked.reference_frame)?.len() as u64;
    let masked_size = encode_container(masked)?.len() as u64;
    Ok(SizeReport {
        raw_size,
        sketch_size,
        masked_size,
        masked_to_sketch: masked_size as f64 / sketch_size as f64,
        masked_to_raw: masked_size as f64 / raw_size as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_frame(w: usize, h: usize, rng: &mut ChaCha8Rng) -> Frame {
        Frame::new(w, h, (0..w * h * 3).map(|_| rng.gen()).collect()).unwrap()
    }

    /// Direct per-window summation, no integral images.
    fn ssim_oracle(a: &Frame, b: &Frame, n: usize) -> f64 {
        let (w, h) = a.dims();
        let (la, lb) = (a.luma(), b.luma());
        let (c1, c2) = ((0.01f64 * 255.0).powi(2), (0.03f64 * 255.0).powi(2));
        let mut acc = 0.0;
        let mut count = 0;
        for y in 0..=h - n {
            for x in 0..=w - n {
                let idx: Vec<usize> = (y..y + n)
                    .flat_map(|yy| (x..x + n).map(move |xx| yy * w + xx))
                    .collect();
                let m = idx.len() as f64;
                let ma = idx.iter().map(|&i| la[i]).sum::<f64>() / m;
                let mb = idx.iter().map(|&i| lb[i]).sum::<f64>() / m;
                let va = idx.iter().map(|&i| (la[i] - ma).powi(2)).sum::<f64>() / m;
                let vb = idx.iter().map(|&i| (lb[i] - mb).powi(2)).sum::<f64>() / m;
                let cov = idx
                    .iter()
                    .map(|&i| (la[i] - ma) * (lb[i] - mb))
                    .sum::<f64>()
                    / m;
                acc += ((2.0 * ma * mb + c1) * (2.0 * cov + c2))
                    / ((ma * ma + mb * mb + c1) * (va + vb + c2));
                count += 1;
            }
        }
        acc / count as f64
    }

    #[test]
    fn psnr_closed_forms() {
        let a = Frame::filled(8, 8, [10, 20, 30]).unwrap();
        assert_eq!(psnr(&a, &a).unwrap(), PSNR_CAP);
        let black = Frame::filled(4, 4, [0; 3]).unwrap();
        let white = Frame::filled(4, 4, [255; 3]).unwrap();
        assert!(psnr(&black, &white).unwrap().abs() < 1e-12);
        let b = Frame::filled(8, 8, [26, 36, 46]).unwrap();
        let expected = 10.0 * (255.0f64.powi(2) / 256.0).log10();
        assert!((psnr(&a, &b).unwrap() - expected).abs() < 1e-12);
        assert!((psnr(&a, &b).unwrap() - 24.05).abs() < 0.01);
        assert!(psnr(&a, &Frame::filled(8, 7, [0; 3]).unwrap()).is_err());
    }

    #[test]
    fn ssim_identity_and_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_frame(16, 12, &mut rng);
        assert!((ssim(&a, &a, &SsimConfig::default()).unwrap() - 1.0).abs() < 1e-9);
        let black = Frame::filled(16, 16, [0; 3]).unwrap();
        let white = Frame::filled(16, 16, [255; 3]).unwrap();
        assert!(ssim(&black, &white, &SsimConfig::default()).unwrap() < 0.05);
    }

    #[test]
    fn ssim_matches_direct_summation() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..3 {
            let a = random_frame(32, 32, &mut rng);
            let b = random_frame(32, 32, &mut rng);
            let fast = ssim(&a, &b, &SsimConfig::default()).unwrap();
            assert!((fast - ssim_oracle(&a, &b, 8)).abs() < 1e-6);
        }
    }

    #[test]
    fn ssim_rejects_small_frames() {
        let a = Frame::filled(7, 20, [0; 3]).unwrap();
        assert!(ssim(&a, &a, &SsimConfig::default()).is_err());
    }

    #[test]
    fn noise_monotonically_lowers_psnr() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = Frame::filled(24, 24, [128; 3]).unwrap();
        let noise: Vec<f64> = (0..24 * 24 * 3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut last = f64::INFINITY;
        for amp in [4.0, 16.0, 64.0] {
            let data = a
                .data()
                .iter()
                .zip(&noise)
                .map(|(&v, n)| (v as f64 + amp * n).round().clamp(0.0, 255.0) as u8)
                .collect();
            let p = psnr(&a, &Frame::new(24, 24, data).unwrap()).unwrap();
            assert!(p < last);
            last = p;
        }
    }

    #[test]
    fn evaluate_counts() {
        let a = Frame::filled(8, 8, [1; 3]).unwrap();
        let r = evaluate_video(
            &[a.clone(), a.clone()],
            &[a.clone(), a.clone()],
            &SsimConfig::default(),
        )
        .unwrap();
        assert_eq!(r.frame_count, 2);
        assert_eq!(r.mean_ssim, 1.0);
        assert!(evaluate_video(std::slice::from_ref(&a), &[], &SsimConfig::default()).is_err());
        let json = serde_json::to_string(&r.kid).unwrap();
        assert_eq!(json, "\"unavailable\"");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn metrics_are_symmetric(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_frame(12, 10, &mut rng);
            let b = random_frame(12, 10, &mut rng);
            prop_assert_eq!(psnr(&a, &b).unwrap(), psnr(&b, &a).unwrap());
            let cfg = SsimConfig::default();
            prop_assert!((ssim(&a, &b, &cfg).unwrap() - ssim(&b, &a, &cfg).unwrap()).abs() < 1e-12);
            prop_assert!((ssim(&a, &a, &cfg).unwrap() - 1.0).abs() < 1e-9);
        }
    }
}
