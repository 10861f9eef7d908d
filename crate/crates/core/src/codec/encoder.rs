use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    extract_sketch, mask_sketch, EdgeExtractorConfig, MaskedSketchVideo, SketchVideo, DEFAULT_FPS,
};
use crate::foreground::{
    classify_foreground, ForegroundSet, InstanceTrack, VideoGeometry, DEFAULT_IOU_THRESHOLD,
};
use crate::imaging::{BinaryMask, Frame};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EncoderConfig {
    pub edge: EdgeExtractorConfig,
    pub iou_threshold: f64,
    pub fps: u8,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig {
            edge: EdgeExtractorConfig::default(),
            iou_threshold: DEFAULT_IOU_THRESHOLD,
            fps: DEFAULT_FPS,
        }
    }
}

/// Encoder output: the transmitted masked video plus the intermediate
/// representations, kept for size accounting and inspection.
#[derive(Debug, Clone)]
pub struct EncodedVideo {
    pub masked: MaskedSketchVideo,
    pub sketch: SketchVideo,
    pub foreground: ForegroundSet,
    pub foreground_masks: Vec<BinaryMask>,
}

pub fn encode_video(
    frames: &[Frame],
    tracks: &[InstanceTrack],
    cfg: &EncoderConfig,
) -> Result<EncodedVideo> {
    if frames.len() < 2 {
        return Err(Error::Protocol(format!(
            "need at least 2 frames to encode, got {}",
            frames.len()
        )));
    }
    let dims = frames[0].dims();
    for f in frames {
        Error::check_dims(dims, f.dims())?;
    }
    cfg.edge.validate()?;
    let geometry = VideoGeometry {
        width: dims.0,
        height: dims.1,
        frames: frames.len(),
    };
    let foreground = classify_foreground(tracks, cfg.iou_threshold, geometry)?;

    let sketches = frames
        .par_iter()
        .map(|f| extract_sketch(f, &cfg.edge))
        .collect::<Result<Vec<_>>>()?;
    let foreground_masks = (0..frames.len())
        .map(|t| foreground.frame_mask(t))
        .collect::<Result<Vec<_>>>()?;
    let masked_frames = sketches
        .par_iter()
        .zip(&foreground_masks)
        .map(|(s, m)| mask_sketch(s, m))
        .collect::<Result<Vec<_>>>()?;

    let sketch = SketchVideo::new(sketches, cfg.fps)?;
    let masked = MaskedSketchVideo {
        masked_frames,
        keyframe_first: sketch.frames[0].clone(),
        keyframe_last: sketch.frames[frames.len() - 1].clone(),
        reference_frame: frames[0].clone(),
        fps: cfg.fps,
    };
    Ok(EncodedVideo {
        masked,
        sketch,
        foreground,
        foreground_masks,
    })
}
