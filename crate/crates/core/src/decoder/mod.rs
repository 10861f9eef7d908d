//! Frame reconstruction from masked sketches.
//!
//! Frame 1 is the transmitted reference frame. Every later frame blends the
//! previous output, warped by an estimated flow, with a frame translated
//! from the current sketch; an occlusion mask picks between the two per
//! pixel. Flow, occlusion and translation are trait objects so that learned
//! estimators can replace the deterministic reference implementations.

mod adain;
mod attention;
mod compose;
mod features;
mod flow;
mod occlusion;
mod translate;
mod warp;

pub use adain::{adain, StyleVector};
pub use attention::{align_features, attention_correlation, masked_softmax, AttentionMatrix};
pub use compose::compose_frame;
pub use features::{extract_features, FeatureMap, FeatureSource, FEATURE_CHANNELS};
pub use flow::{BlockMatching, FlowEstimator, FlowField, ZeroFlow};
pub use occlusion::{ConstantOne, OcclusionEstimator, SketchDisagreement, SoftMask};
pub use translate::{ReferenceTranslator, Translator};
pub use warp::{warp, warp_sketch, BorderPolicy};

use log::debug;
use serde::{Deserialize, Serialize};

use crate::codec::{MaskedSketchVideo, SketchReconstructor};
use crate::imaging::{Frame, SketchFrame};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlowMethod {
    Zero,
    #[serde(alias = "block-matching")]
    Block,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OcclusionMethod {
    #[serde(alias = "sketch-disagreement")]
    Disagreement,
    #[serde(alias = "constant-one")]
    One,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecoderConfig {
    /// Number of previous generated frames handed to the estimators.
    pub window: usize,
    /// Softmax sharpness of the attention alignment.
    pub alpha: f64,
    pub feature_scale: usize,
    pub flow: FlowMethod,
    pub occlusion: OcclusionMethod,
    pub border: BorderPolicy,
    pub block_size: usize,
    pub search_radius: usize,
    pub dilation_radius: usize,
    pub edge_strength: f64,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        DecoderConfig {
            window: 1,
            alpha: 100.0,
            feature_scale: 4,
            flow: FlowMethod::Block,
            occlusion: OcclusionMethod::Disagreement,
            border: BorderPolicy::Clamp,
            block_size: 8,
            search_radius: 4,
            dilation_radius: 2,
            edge_strength: 0.25,
        }
    }
}

impl DecoderConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if self.window < 1 {
            return fail("window must be at least 1".into());
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return fail(format!("alpha {} must be positive", self.alpha));
        }
        if self.feature_scale < 1 || self.block_size < 1 {
            return fail("feature scale and block size must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.edge_strength) {
            return fail(format!(
                "edge strength {} outside [0, 1]",
                self.edge_strength
            ));
        }
        Ok(())
    }

    pub fn translator(&self) -> ReferenceTranslator {
        ReferenceTranslator {
            feature_scale: self.feature_scale,
            alpha: self.alpha,
            edge_strength: self.edge_strength,
        }
    }
}

/// Flow estimation through the configured reference estimator.
pub fn estimate_flow(
    history: &[Frame],
    sketches: &[SketchFrame],
    cfg: &DecoderConfig,
) -> Result<FlowField> {
    Decoder::new(cfg)?.flow.estimate(history, sketches)
}

pub fn predict_occlusion_mask(
    history: &[Frame],
    sketches: &[SketchFrame],
    flow: &FlowField,
    cfg: &DecoderConfig,
) -> Result<SoftMask> {
    Decoder::new(cfg)?
        .occlusion
        .predict(history, sketches, flow)
}

pub fn translate_frame(
    sketch: &SketchFrame,
    reference: &Frame,
    cfg: &DecoderConfig,
) -> Result<Frame> {
    cfg.validate()?;
    cfg.translator().translate(sketch, reference)
}

pub struct Decoder {
    pub flow: Box<dyn FlowEstimator>,
    pub occlusion: Box<dyn OcclusionEstimator>,
    pub translator: Box<dyn Translator>,
    pub window: usize,
    pub border: BorderPolicy,
}

impl Decoder {
    pub fn new(cfg: &DecoderConfig) -> Result<Self> {
        cfg.validate()?;
        let flow: Box<dyn FlowEstimator> = match cfg.flow {
            FlowMethod::Zero => Box::new(ZeroFlow),
            FlowMethod::Block => Box::new(BlockMatching {
                block_size: cfg.block_size,
                search_radius: cfg.search_radius,
            }),
        };
        let occlusion: Box<dyn OcclusionEstimator> = match cfg.occlusion {
            OcclusionMethod::One => Box::new(ConstantOne),
            OcclusionMethod::Disagreement => Box::new(SketchDisagreement {
                dilation_radius: cfg.dilation_radius,
                border: cfg.border,
            }),
        };
        Ok(Decoder {
            flow,
            occlusion,
            translator: Box::new(cfg.translator()),
            window: cfg.window,
            border: cfg.border,
        })
    }

    /// Full sketches of every frame rebuilt from the container.
    pub fn reconstruct_sketches(&self, msv: &MaskedSketchVideo) -> Result<Vec<SketchFrame>> {
        msv.validate()?;
        let rec = SketchReconstructor::new(
            &msv.masked_frames[0],
            msv.keyframe_first.clone(),
            msv.keyframe_last.clone(),
        )?;
        msv.masked_frames
            .iter()
            .map(|ms| rec.reconstruct(ms))
            .collect()
    }

    pub fn decode(&self, msv: &MaskedSketchVideo) -> Result<Vec<Frame>> {
        let sketches = self.reconstruct_sketches(msv)?;
        let reference = &msv.reference_frame;
        let mut frames = vec![reference.clone()];
        for t in 1..sketches.len() {
            // warm-up: early frames see a shorter history
            let start = t.saturating_sub(self.window);
            let history = &frames[start..t];
            let window = &sketches[start..=t];
            let flow = self.flow.estimate(history, window)?;
            let warped = warp(&frames[t - 1], &flow, self.border)?;
            let mask = self.occlusion.predict(history, window, &flow)?;
            let next = if mask.is_zero() {
                warped
            } else {
                let generated = self.translator.translate(&sketches[t], reference)?;
                compose_frame(&warped, &generated, &mask)?
            };
            debug!("decoded frame {} of {}", t + 1, sketches.len());
            frames.push(next);
        }
        Ok(frames)
    }
}

pub fn decode_video(msv: &MaskedSketchVideo, cfg: &DecoderConfig) -> Result<Vec<Frame>> {
    Decoder::new(cfg)?.decode(msv)
}
