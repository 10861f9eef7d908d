//! Correlation attention between sketch and reference features.

use rayon::prelude::*;

use super::FeatureMap;
use crate::{Error, Result};

/// Dense `rows × cols` matrix; row `u` indexes query positions (row-major
/// over the query map), column `v` reference positions.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionMatrix {
    pub rows: usize,
    pub cols: usize,
    pub query_height: usize,
    pub query_width: usize,
    pub values: Vec<f64>,
}

impl AttentionMatrix {
    pub fn row(&self, u: usize) -> &[f64] {
        &self.values[u * self.cols..(u + 1) * self.cols]
    }

    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.values[u * self.cols + v]
    }

    pub fn row_argmax(&self, u: usize) -> usize {
        let row = self.row(u);
        (0..self.cols).fold(0, |best, v| if row[v] > row[best] { v } else { best })
    }
}

/// Channel vectors at every position, mean-centered across channels and
/// scaled to unit length. Degenerate (constant) vectors become all-zero.
fn centered_unit_vectors(map: &FeatureMap) -> Vec<f64> {
    let c = map.channels;
    let mut out = vec![0.0; map.positions() * c];
    for p in 0..map.positions() {
        let v = map.vector(p);
        let mean = v.iter().sum::<f64>() / c as f64;
        let centered: Vec<f64> = v.iter().map(|x| x - mean).collect();
        let norm = centered.iter().map(|x| x * x).sum::<f64>().sqrt();
        let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if norm == 0.0 || norm <= 1e-9 * scale {
            continue;
        }
        for (o, x) in out[p * c..(p + 1) * c].iter_mut().zip(&centered) {
            *o = x / norm;
        }
    }
    out
}

/// Centered cosine similarity between every query and key position, in [-1, 1].
pub fn attention_correlation(q: &FeatureMap, k: &FeatureMap) -> Result<AttentionMatrix> {
    if q.channels != k.channels {
        return Err(Error::ChannelMismatch(q.channels, k.channels));
    }
    let c = q.channels;
    let (rows, cols) = (q.positions(), k.positions());
    let qn = centered_unit_vectors(q);
    let kn = centered_unit_vectors(k);
    let mut values = vec![0.0; rows * cols];
    values
        .par_chunks_mut(cols)
        .enumerate()
        .for_each(|(u, row)| {
            let qu = &qn[u * c..(u + 1) * c];
            for (v, out) in row.iter_mut().enumerate() {
                let kv = &kn[v * c..(v + 1) * c];
                let dot: f64 = qu.iter().zip(kv).map(|(a, b)| a * b).sum();
                *out = dot.clamp(-1.0, 1.0);
            }
        });
    Ok(AttentionMatrix {
        rows,
        cols,
        query_height: q.height,
        query_width: q.width,
        values,
    })
}

/// Row-wise softmax of `alpha · max(A, 0)`.
pub fn masked_softmax(a: &AttentionMatrix, alpha: f64) -> Result<AttentionMatrix> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "softmax sharpness {alpha} must be positive"
        )));
    }
    let mut out = a.clone();
    out.values.par_chunks_mut(a.cols).for_each(|row| {
        for x in row.iter_mut() {
            *x = alpha * x.max(0.0);
        }
        let peak = row.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x));
        let mut total = 0.0;
        for x in row.iter_mut() {
            *x = (*x - peak).exp();
            total += *x;
        }
        for x in row.iter_mut() {
            *x /= total;
        }
    });
    Ok(out)
}

/// Attention-weighted gather: every query position becomes a convex
/// combination of the value map's positions.
pub fn align_features(a: &AttentionMatrix, values: &FeatureMap, alpha: f64) -> Result<FeatureMap> {
    if a.cols != values.positions() {
        return Err(Error::BufferLength {
            expected: a.cols,
            actual: values.positions(),
        });
    }
    let weights = masked_softmax(a, alpha)?;
    let ch = values.channels;
    let mut rows = vec![0.0; a.rows * ch];
    rows.par_chunks_mut(ch).enumerate().for_each(|(u, out)| {
        let w = weights.row(u);
        for (c, o) in out.iter_mut().enumerate() {
            let vc = values.channel(c);
            *o = w.iter().zip(vc).map(|(a, b)| a * b).sum();
        }
    });
    let mut out = FeatureMap::zeros(ch, a.query_height, a.query_width);
    for u in 0..a.rows {
        for c in 0..ch {
            out.values[c * a.rows + u] = rows[u * ch + c];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn map(channels: usize, h: usize, w: usize, f: impl Fn(usize, usize) -> f64) -> FeatureMap {
        let n = h * w;
        let values = (0..channels * n).map(|i| f(i / n, i % n)).collect();
        FeatureMap::new(channels, h, w, values).unwrap()
    }

    fn pseudo(i: usize, salt: u64) -> f64 {
        let x = (i as u64 ^ salt).wrapping_mul(0x9E3779B97F4A7C15);
        ((x >> 11) as f64) / ((1u64 << 53) as f64)
    }

    #[test]
    fn self_similarity_is_one() {
        let q = map(4, 3, 3, |c, p| pseudo(c * 9 + p, 1));
        let a = attention_correlation(&q, &q).unwrap();
        for u in 0..a.rows {
            assert!((a.get(u, u) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn hand_computed_anticorrelation() {
        let q = FeatureMap::new(2, 1, 1, vec![2.0, 0.0]).unwrap();
        let k = FeatureMap::new(2, 1, 1, vec![0.0, 2.0]).unwrap();
        assert!((attention_correlation(&q, &k).unwrap().get(0, 0) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn orthogonal_centered_vectors_score_zero() {
        // centered (1,-1,0,0) and (0,0,1,-1)
        let q = FeatureMap::new(4, 1, 1, vec![1.0, -1.0, 0.0, 0.0]).unwrap();
        let k = FeatureMap::new(4, 1, 1, vec![0.0, 0.0, 1.0, -1.0]).unwrap();
        assert_eq!(attention_correlation(&q, &k).unwrap().get(0, 0), 0.0);
    }

    #[test]
    fn constant_vectors_score_zero() {
        let q = FeatureMap::new(3, 1, 1, vec![0.3, 0.3, 0.3]).unwrap();
        let k = FeatureMap::new(3, 1, 1, vec![0.1, 0.5, 0.9]).unwrap();
        assert_eq!(attention_correlation(&q, &k).unwrap().get(0, 0), 0.0);
    }

    #[test]
    fn channel_mismatch() {
        let q = FeatureMap::zeros(2, 1, 1);
        let k = FeatureMap::zeros(3, 1, 1);
        assert!(matches!(
            attention_correlation(&q, &k),
            Err(Error::ChannelMismatch(2, 3))
        ));
    }

    #[test]
    fn identity_attention_copies_values() {
        let n = 6;
        let mut values = vec![-0.5; n * n];
        for u in 0..n {
            values[u * n + u] = 1.0;
        }
        let a = AttentionMatrix {
            rows: n,
            cols: n,
            query_height: 2,
            query_width: 3,
            values,
        };
        let v = map(3, 2, 3, |c, p| pseudo(c * 6 + p, 9) * 10.0);
        let x = align_features(&a, &v, 100.0).unwrap();
        for (got, want) in x.values.iter().zip(&v.values) {
            assert!((got - want).abs() < 1e-3);
        }
    }

    #[test]
    fn uniform_attention_averages() {
        let a = AttentionMatrix {
            rows: 4,
            cols: 4,
            query_height: 2,
            query_width: 2,
            values: vec![0.3; 16],
        };
        let v = map(2, 2, 2, |c, p| (c * 4 + p) as f64);
        let x = align_features(&a, &v, 100.0).unwrap();
        for c in 0..2 {
            let mean = v.channel(c).iter().sum::<f64>() / 4.0;
            assert!(x.channel(c).iter().all(|&y| (y - mean).abs() < 1e-12));
        }
    }

    #[test]
    fn relu_floors_negative_correlations() {
        let a = AttentionMatrix {
            rows: 1,
            cols: 3,
            query_height: 1,
            query_width: 1,
            values: vec![0.4, -0.9, -0.1],
        };
        let alpha = 7.0;
        let w = masked_softmax(&a, alpha).unwrap();
        let ratio = w.get(0, 0) / w.get(0, 1);
        assert!((ratio - (alpha * 0.4f64).exp()).abs() < 1e-9);
        assert_eq!(w.get(0, 1), w.get(0, 2));
        assert!(masked_softmax(&a, 0.0).is_err());
    }

    #[test]
    fn align_size_mismatch() {
        let a = AttentionMatrix {
            rows: 1,
            cols: 3,
            query_height: 1,
            query_width: 1,
            values: vec![0.0; 3],
        };
        assert!(align_features(&a, &FeatureMap::zeros(1, 1, 2), 1.0).is_err());
    }

    proptest! {
        #[test]
        fn rows_are_stochastic_and_outputs_bounded(salt in any::<u64>(), alpha in 0.01f64..500.0) {
            let q = map(5, 3, 4, |c, p| pseudo(c * 12 + p, salt));
            let k = map(5, 2, 5, |c, p| pseudo(c * 10 + p, salt ^ 0xabc));
            let v = map(3, 2, 5, |c, p| pseudo(c * 10 + p, salt ^ 0x123) * 4.0 - 2.0);
            let a = attention_correlation(&q, &k).unwrap();
            prop_assert!(a.values.iter().all(|x| (-1.0..=1.0).contains(x)));
            let w = masked_softmax(&a, alpha).unwrap();
            for u in 0..w.rows {
                prop_assert!((w.row(u).iter().sum::<f64>() - 1.0).abs() < 1e-6);
            }
            let x = align_features(&a, &v, alpha).unwrap();
            for c in 0..3 {
                let lo = v.channel(c).iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = v.channel(c).iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                for &y in x.channel(c) {
                    prop_assert!(y >= lo - 1e-12 && y <= hi + 1e-12);
                }
            }
        }

        #[test]
        fn positive_scaling_leaves_correlation_unchanged(salt in any::<u64>(), sq in 1e-3f64..1e3, sk in 1e-3f64..1e3) {
            let q = map(5, 2, 3, |c, p| pseudo(c * 6 + p, salt));
            let k = map(5, 3, 2, |c, p| pseudo(c * 6 + p, !salt));
            let scale = |m: &FeatureMap, s: f64| FeatureMap { values: m.values.iter().map(|x| x * s).collect(), ..m.clone() };
            let a = attention_correlation(&q, &k).unwrap();
            let b = attention_correlation(&scale(&q, sq), &scale(&k, sk)).unwrap();
            for (x, y) in a.values.iter().zip(&b.values) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }
    }
}
