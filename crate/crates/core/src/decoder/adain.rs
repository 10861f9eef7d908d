use super::FeatureMap;
use crate::{Error, Result};

/// Per-channel mean and population standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct StyleVector {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

// channels flatter than this are treated as constant
const STD_FLOOR: f64 = 1e-12;

impl StyleVector {
    pub fn of(map: &FeatureMap) -> StyleVector {
        let (mean, std) = (0..map.channels).map(|c| moments(map.channel(c))).unzip();
        StyleVector { mean, std }
    }

    pub fn channels(&self) -> usize {
        self.mean.len()
    }
}

pub(crate) fn moments(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Adaptive instance normalization: re-standardize each content channel and
/// give it the style's moments. A constant content channel maps to the
/// style mean.
pub fn adain(content: &FeatureMap, style: &StyleVector) -> Result<FeatureMap> {
    if content.channels != style.channels() {
        return Err(Error::ChannelMismatch(content.channels, style.channels()));
    }
    let mut out = content.clone();
    for c in 0..content.channels {
        let (mean, std) = moments(content.channel(c));
        let (s_mean, s_std) = (style.mean[c], style.std[c]);
        for x in out.channel_mut(c) {
            let normalized = if std > STD_FLOOR {
                (*x - mean) / std
            } else {
                0.0
            };
            *x = s_std * normalized + s_mean;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_example() {
        let content = FeatureMap::new(1, 2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let style = StyleVector {
            mean: vec![10.0],
            std: vec![2.0],
        };
        let out = adain(&content, &style).unwrap();
        let s = 1.25f64.sqrt();
        let expected: Vec<f64> = [1.0, 2.0, 3.0, 4.0]
            .iter()
            .map(|x| 2.0 * (x - 2.5) / s + 10.0)
            .collect();
        for (o, e) in out.values.iter().zip(&expected) {
            assert!((o - e).abs() < 1e-12);
        }
        assert!((out.values[0] - 7.316_718_427).abs() < 1e-8);
        assert!((out.values[3] - 12.683_281_573).abs() < 1e-8);
    }

    #[test]
    fn own_moments_are_identity() {
        let content = FeatureMap::new(
            2,
            2,
            3,
            (0..12).map(|i| (i * i) as f64 * 0.37 - 3.0).collect(),
        )
        .unwrap();
        let out = adain(&content, &StyleVector::of(&content)).unwrap();
        for (o, c) in out.values.iter().zip(&content.values) {
            assert!((o - c).abs() < 1e-6);
        }
    }

    #[test]
    fn unit_style_standardizes() {
        let content = FeatureMap::new(1, 1, 5, vec![3.0, 9.0, -1.0, 4.0, 0.5]).unwrap();
        let out = adain(
            &content,
            &StyleVector {
                mean: vec![0.0],
                std: vec![1.0],
            },
        )
        .unwrap();
        let (m, s) = moments(&out.values);
        assert!(m.abs() < 1e-12 && (s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_channel_takes_style_mean() {
        let content = FeatureMap::new(1, 1, 4, vec![0.7; 4]).unwrap();
        let out = adain(
            &content,
            &StyleVector {
                mean: vec![0.2],
                std: vec![5.0],
            },
        )
        .unwrap();
        assert!(out.values.iter().all(|&v| v == 0.2));
    }

    #[test]
    fn channel_mismatch() {
        let content = FeatureMap::zeros(2, 1, 1);
        assert!(adain(
            &content,
            &StyleVector {
                mean: vec![0.0],
                std: vec![1.0]
            }
        )
        .is_err());
    }
}
