//! Static-background composition, foreground masking and sketch
//! reconstruction.
//!
//! Every pixel of a composed sketch comes from exactly one source:
//!
//! * the current sketch where the current frame's foreground mask is set,
//! * the last keyframe where frame 1's foreground has since moved away
//!   (`m_1 \ (m_1 ∩ m_t)`), since the first keyframe still shows the object there,
//! * the first keyframe everywhere else.

use crate::imaging::{
    mask_difference, mask_intersection, mask_union, sign_mask, BinaryMask, MaskedSketchFrame,
    SketchFrame, BACKGROUND, FOREGROUND_SENTINEL,
};
use crate::{Error, Result};

/// The three disjoint source regions for one frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionMasks {
    pub current: BinaryMask,
    pub first_keyframe: BinaryMask,
    pub last_keyframe: BinaryMask,
}

pub fn region_masks(m_t: &BinaryMask, m_1: &BinaryMask) -> Result<RegionMasks> {
    let vacated = mask_difference(m_1, &mask_intersection(m_1, m_t)?)?;
    let first_keyframe = mask_union(m_t, &vacated)?.not();
    Ok(RegionMasks {
        current: m_t.clone(),
        first_keyframe,
        last_keyframe: vacated,
    })
}

fn select(regions: &RegionMasks, current: &[u8], first: &[u8], last: &[u8], i: usize) -> u8 {
    if regions.current.get_index(i) {
        current[i]
    } else if regions.last_keyframe.get_index(i) {
        last[i]
    } else {
        first[i]
    }
}

/// Static-background sketch for frame `t` from the current sketch, the two
/// keyframe sketches and the foreground masks of frames `t` and 1.
pub fn compose_static_background(
    s_t: &SketchFrame,
    s_first: &SketchFrame,
    s_last: &SketchFrame,
    m_t: &BinaryMask,
    m_first: &BinaryMask,
) -> Result<SketchFrame> {
    let dims = s_t.dims();
    for d in [s_first.dims(), s_last.dims(), m_t.dims(), m_first.dims()] {
        Error::check_dims(dims, d)?;
    }
    let regions = region_masks(m_t, m_first)?;
    let data = (0..dims.0 * dims.1)
        .map(|i| select(&regions, s_t.data(), s_first.data(), s_last.data(), i))
        .collect();
    SketchFrame::new(dims.0, dims.1, data)
}

/// Keep the sketch inside the mask, lifting in-mask background to the
/// sentinel value so the mask survives as `sample > 0`.
pub fn mask_sketch(s_t: &SketchFrame, m_t: &BinaryMask) -> Result<MaskedSketchFrame> {
    Error::check_dims(s_t.dims(), m_t.dims())?;
    let data = s_t
        .data()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            if m_t.get_index(i) {
                v.max(FOREGROUND_SENTINEL)
            } else {
                BACKGROUND
            }
        })
        .collect();
    SketchFrame::new(s_t.width(), s_t.height(), data)
}

/// Decoder-side sketch reconstruction with the first frame's foreground
/// mask cached for the whole clip.
#[derive(Debug, Clone)]
pub struct SketchReconstructor {
    first_mask: BinaryMask,
    s_first: SketchFrame,
    s_last: SketchFrame,
}

impl SketchReconstructor {
    pub fn new(
        ms_first: &MaskedSketchFrame,
        s_first: SketchFrame,
        s_last: SketchFrame,
    ) -> Result<Self> {
        Error::check_dims(ms_first.dims(), s_first.dims())?;
        Error::check_dims(ms_first.dims(), s_last.dims())?;
        Ok(SketchReconstructor {
            first_mask: sign_mask(ms_first),
            s_first,
            s_last,
        })
    }

    pub fn first_mask(&self) -> &BinaryMask {
        &self.first_mask
    }

    /// Rebuild the full sketch of one frame. The additive composition leaves
    /// sentinel samples in the foreground, which the final binarization
    /// (`< 128 → 0`, otherwise 255) strips.
    pub fn reconstruct(&self, ms_t: &MaskedSketchFrame) -> Result<SketchFrame> {
        Error::check_dims(self.s_first.dims(), ms_t.dims())?;
        let m_t = sign_mask(ms_t);
        let regions = region_masks(&m_t, &self.first_mask)?;
        let (first, last, ms) = (self.s_first.data(), self.s_last.data(), ms_t.data());
        let data = (0..ms.len())
            .map(|i| {
                let background = u16::from(regions.first_keyframe.get_index(i)) * first[i] as u16;
                let vacated = u16::from(regions.last_keyframe.get_index(i)) * last[i] as u16;
                let v = ms[i] as u16 + background + vacated;
                if v < 128 {
                    0
                } else {
                    255
                }
            })
            .collect();
        SketchFrame::new(ms_t.width(), ms_t.height(), data)
    }
}

/// One-shot reconstruction. `ms_first` is the masked sketch of frame 1; the
/// decoder cannot recover the vacated region without it.
pub fn reconstruct_sketch(
    ms_t: &MaskedSketchFrame,
    ms_first: Option<&MaskedSketchFrame>,
    s_first: &SketchFrame,
    s_last: &SketchFrame,
) -> Result<SketchFrame> {
    let ms_first =
        ms_first.ok_or_else(|| Error::Protocol("first-frame masked sketch is required".into()))?;
    SketchReconstructor::new(ms_first, s_first.clone(), s_last.clone())?.reconstruct(ms_t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sk(v: &[u8]) -> SketchFrame {
        SketchFrame::new(v.len(), 1, v.to_vec()).unwrap()
    }

    fn mk(v: &[u8]) -> BinaryMask {
        BinaryMask::from_bytes(v.len(), 1, v).unwrap()
    }

    #[test]
    fn compose_hand_example() {
        let out = compose_static_background(
            &sk(&[0, 255, 0, 0]),
            &sk(&[255, 0, 0, 0]),
            &sk(&[0, 0, 0, 255]),
            &mk(&[0, 1, 0, 0]),
            &mk(&[1, 0, 0, 0]),
        )
        .unwrap();
        assert_eq!(out, sk(&[0, 255, 0, 0]));
    }

    #[test]
    fn compose_limits() {
        let (s_t, s_1, s_last) = (
            sk(&[0, 255, 255, 0]),
            sk(&[255, 0, 255, 0]),
            sk(&[0, 0, 255, 255]),
        );
        let none = BinaryMask::zeros(4, 1);
        assert_eq!(
            compose_static_background(&s_t, &s_1, &s_last, &none, &none).unwrap(),
            s_1
        );
        let all = BinaryMask::ones(4, 1);
        assert_eq!(
            compose_static_background(&s_t, &s_1, &s_last, &all, &none).unwrap(),
            s_t
        );
        assert_eq!(
            compose_static_background(&s_t, &s_1, &s_last, &all, &all).unwrap(),
            s_t
        );
        assert!(compose_static_background(&s_t, &s_1, &sk(&[0; 3]), &all, &all).is_err());
    }

    #[test]
    fn mask_sketch_examples() {
        assert_eq!(
            mask_sketch(&sk(&[0, 255, 0, 0]), &mk(&[0, 1, 1, 0])).unwrap(),
            sk(&[0, 255, 1, 0])
        );
        assert_eq!(
            mask_sketch(&sk(&[0, 255, 255, 0]), &BinaryMask::zeros(4, 1)).unwrap(),
            sk(&[0; 4])
        );
        assert_eq!(
            mask_sketch(&sk(&[0; 4]), &BinaryMask::ones(4, 1)).unwrap(),
            sk(&[1; 4])
        );
        assert!(mask_sketch(&sk(&[0; 4]), &BinaryMask::ones(3, 1)).is_err());
    }

    #[test]
    fn reconstruct_hand_chain() {
        let (s_1, s_last) = (sk(&[255, 0, 0, 0]), sk(&[0, 0, 0, 255]));
        let ms_1 = mask_sketch(&s_1, &mk(&[1, 0, 0, 0])).unwrap();
        let ms_t = mask_sketch(&sk(&[0, 255, 0, 0]), &mk(&[0, 1, 0, 0])).unwrap();
        assert_eq!(ms_t, sk(&[0, 255, 0, 0]));
        let out = reconstruct_sketch(&ms_t, Some(&ms_1), &s_1, &s_last).unwrap();
        assert_eq!(out, sk(&[0, 255, 0, 0]));
    }

    #[test]
    fn reconstruct_limits() {
        let (s_1, s_last) = (sk(&[255, 0, 255, 0]), sk(&[0, 255, 255, 255]));
        let empty = sk(&[0; 4]);
        assert_eq!(
            reconstruct_sketch(&empty, Some(&empty), &s_1, &s_last).unwrap(),
            s_1
        );

        let s = sk(&[0, 255, 0, 255]);
        let full = mask_sketch(&s, &BinaryMask::ones(4, 1)).unwrap();
        assert_eq!(
            reconstruct_sketch(&full, Some(&empty), &s_1, &s_last).unwrap(),
            s
        );
        assert_eq!(
            reconstruct_sketch(&full, Some(&full), &s_1, &s_last).unwrap(),
            s
        );
    }

    #[test]
    fn reconstruct_requires_first_mask() {
        let s = sk(&[0; 4]);
        assert!(matches!(
            reconstruct_sketch(&s, None, &s, &s),
            Err(Error::Protocol(_))
        ));
    }

    fn pairs(len: usize) -> impl Strategy<Value = (Vec<bool>, Vec<bool>)> {
        (
            prop::collection::vec(any::<bool>(), len),
            prop::collection::vec(any::<bool>(), len),
        )
    }

    fn sketch_strategy(len: usize) -> impl Strategy<Value = Vec<u8>> {
        prop::collection::vec(prop_oneof![Just(0u8), Just(255u8)], len)
    }

    proptest! {
        // Region coefficients, evaluated as integers, partition every pixel.
        #[test]
        fn regions_partition((a, b) in pairs(96)) {
            let m_t = BinaryMask::from_fn(12, 8, |x, y| a[y * 12 + x]);
            let m_1 = BinaryMask::from_fn(12, 8, |x, y| b[y * 12 + x]);
            let r = region_masks(&m_t, &m_1).unwrap();
            for i in 0..96 {
                let vacated = i32::from(b[i] && !(a[i] && b[i]));
                let background = 1 - i32::from(a[i]) - vacated;
                prop_assert!(background >= 0);
                prop_assert_eq!(i32::from(a[i]) + background + vacated, 1);
                prop_assert_eq!(r.current.get_index(i), a[i]);
                prop_assert_eq!(r.last_keyframe.get_index(i), vacated == 1);
                prop_assert_eq!(r.first_keyframe.get_index(i), background == 1);
            }
        }

        #[test]
        fn sign_recovers_mask(s in sketch_strategy(60), (m, _) in pairs(60)) {
            let s = SketchFrame::new(10, 6, s).unwrap();
            let m = BinaryMask::from_fn(10, 6, |x, y| m[y * 10 + x]);
            prop_assert_eq!(sign_mask(&mask_sketch(&s, &m).unwrap()), m);
        }

        #[test]
        fn reconstruction_matches_composition(
            s_t in sketch_strategy(60), s_1 in sketch_strategy(60), s_last in sketch_strategy(60),
            (a, b) in pairs(60),
        ) {
            let f = |v: Vec<u8>| SketchFrame::new(10, 6, v).unwrap();
            let (s_t, s_1, s_last) = (f(s_t), f(s_1), f(s_last));
            let m_t = BinaryMask::from_fn(10, 6, |x, y| a[y * 10 + x]);
            let m_1 = BinaryMask::from_fn(10, 6, |x, y| b[y * 10 + x]);
            let ms_t = mask_sketch(&s_t, &m_t).unwrap();
            let ms_1 = mask_sketch(&s_1, &m_1).unwrap();
            let rebuilt = reconstruct_sketch(&ms_t, Some(&ms_1), &s_1, &s_last).unwrap();
            let composed = compose_static_background(&s_t, &s_1, &s_last, &m_t, &m_1).unwrap();
            prop_assert_eq!(rebuilt, composed.binarized());
        }
    }
}
