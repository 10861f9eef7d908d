//! Foreground selection from instance tracks.
//!
//! An instance whose masks barely overlap across the clip (low temporal IoU)
//! is moving and is kept as foreground; static fixtures score near 1 and are
//! dropped.

use log::warn;

use crate::imaging::{mask_intersection, mask_union, BinaryMask};
use crate::{Error, Result};

pub const DEFAULT_IOU_THRESHOLD: f64 = 0.8;

/// Width, height and frame count of a clip.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VideoGeometry {
    pub width: usize,
    pub height: usize,
    pub frames: usize,
}

/// One segmented instance with a mask per frame.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceTrack {
    pub id: String,
    masks: Vec<BinaryMask>,
}

impl InstanceTrack {
    pub fn new(id: impl Into<String>, masks: Vec<BinaryMask>) -> Result<Self> {
        let id = id.into();
        let first = masks
            .first()
            .ok_or_else(|| Error::Protocol(format!("track {id} has no frames")))?;
        for m in &masks[1..] {
            Error::check_dims(first.dims(), m.dims())?;
        }
        Ok(InstanceTrack { id, masks })
    }

    /// Build a track from per-frame masks where some frames may be missing;
    /// a missing frame counts as an empty mask.
    pub fn from_sparse(
        id: impl Into<String>,
        geometry: VideoGeometry,
        masks: Vec<Option<BinaryMask>>,
    ) -> Result<Self> {
        if masks.len() != geometry.frames {
            return Err(Error::Protocol(format!(
                "track has {} frame slots, video has {}",
                masks.len(),
                geometry.frames
            )));
        }
        let masks = masks
            .into_iter()
            .map(|m| m.unwrap_or_else(|| BinaryMask::zeros(geometry.width, geometry.height)))
            .collect();
        Self::new(id, masks)
    }

    pub fn masks(&self) -> &[BinaryMask] {
        &self.masks
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.masks[0].dims()
    }
}

/// |intersection of all masks| / |union of all masks|.
pub fn instance_iou(track: &InstanceTrack) -> Result<f64> {
    let mut masks = track.masks.iter();
    let first = masks
        .next()
        .ok_or_else(|| Error::UndefinedIou(track.id.clone()))?;
    let (mut inter, mut union) = (first.clone(), first.clone());
    for m in masks {
        inter = mask_intersection(&inter, m)?;
        union = mask_union(&union, m)?;
    }
    let union_count = union.count_ones();
    if union_count == 0 {
        return Err(Error::UndefinedIou(track.id.clone()));
    }
    Ok(inter.count_ones() as f64 / union_count as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExcludedTrack {
    pub id: String,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct ForegroundSet {
    pub geometry: VideoGeometry,
    pub threshold: f64,
    pub tracks: Vec<InstanceTrack>,
    /// Tracks dropped because their IoU is undefined.
    pub excluded: Vec<ExcludedTrack>,
}

/// Keep the tracks whose IoU is strictly below `threshold`, in input order.
pub fn classify_foreground(
    tracks: &[InstanceTrack],
    threshold: f64,
    geometry: VideoGeometry,
) -> Result<ForegroundSet> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "IoU threshold {threshold} outside (0, 1]"
        )));
    }
    let mut kept = Vec::new();
    let mut excluded = Vec::new();
    for track in tracks {
        Error::check_dims((geometry.width, geometry.height), track.dims())?;
        if track.len() != geometry.frames {
            return Err(Error::Protocol(format!(
                "track {} spans {} frames, video has {}",
                track.id,
                track.len(),
                geometry.frames
            )));
        }
        match instance_iou(track) {
            Ok(iou) if iou < threshold => kept.push(track.clone()),
            Ok(_) => {}
            Err(e @ Error::UndefinedIou(_)) => {
                warn!("excluding track {}: {e}", track.id);
                excluded.push(ExcludedTrack {
                    id: track.id.clone(),
                    reason: e.to_string(),
                });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(ForegroundSet {
        geometry,
        threshold,
        tracks: kept,
        excluded,
    })
}

impl ForegroundSet {
    /// Union of every foreground track's mask at frame `t` (0-based).
    pub fn frame_mask(&self, t: usize) -> Result<BinaryMask> {
        if t >= self.geometry.frames {
            return Err(Error::IndexOutOfRange {
                index: t,
                len: self.geometry.frames,
            });
        }
        let mut acc = BinaryMask::zeros(self.geometry.width, self.geometry.height);
        for track in &self.tracks {
            acc = mask_union(&acc, &track.masks[t])?;
        }
        Ok(acc)
    }

    pub fn is_empty(&self) -> bool {
        self.tracks.is_empty()
    }
}

pub fn frame_foreground_mask(fg: &ForegroundSet, t: usize) -> Result<BinaryMask> {
    fg.frame_mask(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cells(w: usize, h: usize, set: impl IntoIterator<Item = usize>) -> BinaryMask {
        let mut m = BinaryMask::zeros(w, h);
        for i in set {
            m.set_index(i, true);
        }
        m
    }

    fn geometry(w: usize, h: usize, frames: usize) -> VideoGeometry {
        VideoGeometry {
            width: w,
            height: h,
            frames,
        }
    }

    /// Brute-force pixel-set IoU over explicit index sets.
    fn set_iou(frames: &[std::collections::BTreeSet<usize>]) -> f64 {
        let mut inter = frames[0].clone();
        let mut union = frames[0].clone();
        for f in &frames[1..] {
            inter = inter.intersection(f).copied().collect();
            union = union.union(f).copied().collect();
        }
        inter.len() as f64 / union.len() as f64
    }

    #[test]
    fn iou_of_overlapping_pair() {
        // 4 + 4 cells sharing 2: intersection 2, union 6
        let track = InstanceTrack::new("a", vec![cells(4, 4, 0..4), cells(4, 4, 2..6)]).unwrap();
        assert!((instance_iou(&track).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        // cells 0..=3 and 2..=7: intersection 2, union 8
        let track = InstanceTrack::new("b", vec![cells(4, 4, 0..4), cells(4, 4, 2..8)]).unwrap();
        let oracle = set_iou(&[(0..4).collect(), (2..8).collect()]);
        assert_eq!(oracle, 0.25);
        assert_eq!(instance_iou(&track).unwrap(), oracle);
    }

    #[test]
    fn iou_extremes() {
        let m = cells(4, 4, [1, 5, 6]);
        let same = InstanceTrack::new("s", vec![m.clone(), m.clone(), m]).unwrap();
        assert_eq!(instance_iou(&same).unwrap(), 1.0);
        let disjoint = InstanceTrack::new("d", vec![cells(4, 4, [0]), cells(4, 4, [15])]).unwrap();
        assert_eq!(instance_iou(&disjoint).unwrap(), 0.0);
    }

    #[test]
    fn empty_track_is_undefined() {
        let t = InstanceTrack::new("e", vec![BinaryMask::zeros(3, 3); 4]).unwrap();
        assert!(matches!(instance_iou(&t), Err(Error::UndefinedIou(_))));
        assert!(InstanceTrack::new("none", vec![]).is_err());
    }

    #[test]
    fn classify_filters_by_threshold() {
        let g = geometry(4, 4, 2);
        let m = cells(4, 4, 0..5);
        let static_track = InstanceTrack::new("static", vec![m.clone(), m]).unwrap(); // IoU 1
        let mover =
            InstanceTrack::new("mover", vec![cells(4, 4, 0..4), cells(4, 4, 2..8)]).unwrap();
        let fg = classify_foreground(&[static_track, mover], 0.5, g).unwrap();
        assert_eq!(fg.tracks.len(), 1);
        assert_eq!(fg.tracks[0].id, "mover");
    }

    #[test]
    fn classify_threshold_one_and_ties() {
        let g = geometry(4, 4, 2);
        let m = cells(4, 4, 0..3);
        let tracks = vec![
            InstanceTrack::new("a", vec![cells(4, 4, 0..4), cells(4, 4, 2..6)]).unwrap(),
            InstanceTrack::new("b", vec![cells(4, 4, [0]), cells(4, 4, [1])]).unwrap(),
            InstanceTrack::new("still", vec![m.clone(), m]).unwrap(),
        ];
        let fg = classify_foreground(&tracks, 1.0, g).unwrap();
        let ids: Vec<_> = fg.tracks.iter().map(|t| t.id.as_str()).collect();
        assert_eq!(ids, ["a", "b"]);
        // IoU exactly at the threshold is not foreground
        let fg = classify_foreground(&tracks, 1.0 / 3.0, g).unwrap();
        let ids: Vec<_> = fg.tracks.iter().map(|t| t.id.as_str()).collect();
        assert_eq!(ids, ["b"]);
    }

    #[test]
    fn classify_edge_cases() {
        let g = geometry(3, 3, 2);
        assert!(classify_foreground(&[], 0.8, g).unwrap().is_empty());
        assert!(classify_foreground(&[], 0.0, g).is_err());
        assert!(classify_foreground(&[], 1.5, g).is_err());
        let blank = InstanceTrack::new("blank", vec![BinaryMask::zeros(3, 3); 2]).unwrap();
        let fg = classify_foreground(&[blank], 0.8, g).unwrap();
        assert!(fg.is_empty());
        assert_eq!(fg.excluded.len(), 1);
        assert_eq!(fg.excluded[0].id, "blank");
    }

    #[test]
    fn sparse_tracks_fill_empty_masks() {
        let g = geometry(2, 2, 3);
        let t = InstanceTrack::from_sparse(
            "x",
            g,
            vec![Some(cells(2, 2, [0])), None, Some(cells(2, 2, [0]))],
        )
        .unwrap();
        assert!(t.masks()[1].is_empty());
        assert_eq!(instance_iou(&t).unwrap(), 0.0);
    }

    #[test]
    fn frame_masks() {
        let g = geometry(4, 1, 1);
        let a = InstanceTrack::new("a", vec![cells(4, 1, [0])]).unwrap();
        let b = InstanceTrack::new("b", vec![cells(4, 1, [3])]).unwrap();
        let two = ForegroundSet {
            geometry: g,
            threshold: 1.0,
            tracks: vec![a.clone(), b],
            excluded: vec![],
        };
        assert_eq!(frame_foreground_mask(&two, 0).unwrap(), cells(4, 1, [0, 3]));
        let one = ForegroundSet {
            tracks: vec![a.clone()],
            ..two.clone()
        };
        assert_eq!(one.frame_mask(0).unwrap(), a.masks()[0]);
        let none = ForegroundSet {
            tracks: vec![],
            ..two.clone()
        };
        assert!(none.frame_mask(0).unwrap().is_empty());
        assert!(matches!(
            two.frame_mask(1),
            Err(Error::IndexOutOfRange { index: 1, len: 1 })
        ));
    }

    fn track_strategy() -> impl Strategy<Value = (usize, usize, Vec<Vec<bool>>)> {
        (1usize..8, 1usize..8, 1usize..6).prop_flat_map(|(w, h, t)| {
            (
                Just(w),
                Just(h),
                prop::collection::vec(prop::collection::vec(any::<bool>(), w * h), t),
            )
        })
    }

    fn build(w: usize, h: usize, frames: &[Vec<bool>]) -> InstanceTrack {
        let masks = frames
            .iter()
            .map(|f| BinaryMask::from_fn(w, h, |x, y| f[y * w + x]))
            .collect();
        InstanceTrack::new("p", masks).unwrap()
    }

    proptest! {
        #[test]
        fn iou_ignores_frame_order((w, h, frames) in track_strategy()) {
            let fwd = build(w, h, &frames);
            let mut rev_frames = frames.clone();
            rev_frames.reverse();
            let rev = build(w, h, &rev_frames);
            match (instance_iou(&fwd), instance_iou(&rev)) {
                (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false, "order changed definedness"),
            }
        }

        #[test]
        fn adding_a_frame_never_raises_iou((w, h, frames) in track_strategy(), extra in prop::collection::vec(any::<bool>(), 64)) {
            let before = build(w, h, &frames);
            let mut more = frames.clone();
            more.push(extra[..w * h].to_vec());
            let after = build(w, h, &more);
            if let (Ok(a), Ok(b)) = (instance_iou(&before), instance_iou(&after)) {
                prop_assert!(b <= a);
            }
        }

        #[test]
        fn union_contains_members((w, h, frames) in track_strategy(), (_, _, others) in track_strategy()) {
            let t = frames.len().min(others.len());
            let a = build(w, h, &frames[..t]);
            // reshape the second random track onto the same raster
            let b_frames: Vec<Vec<bool>> = others[..t]
                .iter()
                .map(|f| (0..w * h).map(|i| f[i % f.len()]).collect())
                .collect();
            let b = build(w, h, &b_frames);
            let fg = ForegroundSet {
                geometry: geometry(w, h, t),
                threshold: 1.0,
                tracks: vec![a.clone(), b.clone()],
                excluded: vec![],
            };
            for k in 0..t {
                let u = fg.frame_mask(k).unwrap();
                for i in 0..w * h {
                    prop_assert_eq!(u.get_index(i), frames[k][i] || b_frames[k][i]);
                }
            }
        }
    }
}
