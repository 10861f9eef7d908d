//! Sketch compression: edge extraction, foreground masking, sketch
//! reconstruction and the `MSV1` container.

pub mod container;
pub mod edges;
mod encoder;
mod sketch;

pub use container::{
    decode_container, decode_sketch_container, encode_container, encode_sketch_container,
};
pub use edges::{extract_sketch, EdgeExtractorConfig, EdgeOperator};
pub use encoder::{encode_video, EncodedVideo, EncoderConfig};
pub use sketch::{
    compose_static_background, mask_sketch, reconstruct_sketch, region_masks, RegionMasks,
    SketchReconstructor,
};

use crate::imaging::{
    Frame, MaskedSketchFrame, SketchFrame, BACKGROUND, EDGE, FOREGROUND_SENTINEL,
};
use crate::{Error, Result};

pub const DEFAULT_FPS: u8 = 8;

/// A full sketch clip, one binary sketch per frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SketchVideo {
    pub frames: Vec<SketchFrame>,
    pub fps: u8,
}

impl SketchVideo {
    pub fn new(frames: Vec<SketchFrame>, fps: u8) -> Result<Self> {
        let v = SketchVideo { frames, fps };
        v.validate()?;
        Ok(v)
    }

    pub fn validate(&self) -> Result<()> {
        if self.frames.len() < 2 {
            return Err(Error::Protocol(format!(
                "a sketch video needs at least 2 frames, got {}",
                self.frames.len()
            )));
        }
        let dims = self.frames[0].dims();
        for f in &self.frames {
            Error::check_dims(dims, f.dims())?;
        }
        Ok(())
    }

    pub fn dims(&self) -> (usize, usize) {
        self.frames[0].dims()
    }
}

/// Everything the decoder receives: masked sketches for every frame, the
/// first and last full sketches, and the first color frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskedSketchVideo {
    pub masked_frames: Vec<MaskedSketchFrame>,
    pub keyframe_first: SketchFrame,
    pub keyframe_last: SketchFrame,
    pub reference_frame: Frame,
    pub fps: u8,
}

impl MaskedSketchVideo {
    pub fn frame_count(&self) -> usize {
        self.masked_frames.len()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.reference_frame.dims()
    }

    pub fn validate(&self) -> Result<()> {
        let dims = self.dims();
        if self.masked_frames.len() < 2 {
            return Err(Error::Protocol(format!(
                "a masked sketch video needs at least 2 frames, got {}",
                self.masked_frames.len()
            )));
        }
        for key in [&self.keyframe_first, &self.keyframe_last] {
            Error::check_dims(dims, key.dims())?;
            if let Some(v) = key.data().iter().find(|&&v| v != BACKGROUND && v != EDGE) {
                return Err(Error::Protocol(format!(
                    "keyframe sample {v} outside {{0,255}}"
                )));
            }
        }
        for ms in &self.masked_frames {
            Error::check_dims(dims, ms.dims())?;
            if let Some(v) = ms
                .data()
                .iter()
                .find(|&&v| v != BACKGROUND && v != EDGE && v != FOREGROUND_SENTINEL)
            {
                return Err(Error::Protocol(format!(
                    "masked sketch sample {v} outside {{0,1,255}}"
                )));
            }
        }
        Ok(())
    }
}
