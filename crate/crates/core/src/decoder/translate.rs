//! Exemplar-guided sketch-to-image translation with fixed filters.
//!
//! Sketch features query the reference features; the reference colors are
//! gathered through the resulting attention, upsampled to full resolution,
//! re-styled with the reference's global color statistics and finally the
//! sketch's edges are darkened into the result.

use super::{
    adain, align_features, attention_correlation, extract_features, FeatureMap, StyleVector,
};
use crate::imaging::{Frame, SketchFrame, EDGE};
use crate::{Error, Result};

pub trait Translator: Send + Sync {
    fn translate(&self, sketch: &SketchFrame, reference: &Frame) -> Result<Frame>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceTranslator {
    pub feature_scale: usize,
    pub alpha: f64,
    /// Fraction by which edge pixels are darkened.
    pub edge_strength: f64,
}

impl ReferenceTranslator {
    /// Global style of the reference: per-channel RGB moments in [0, 1] units.
    pub fn global_style(reference: &Frame) -> StyleVector {
        StyleVector::of(&FeatureMap::from_frame_rgb(reference))
    }

    /// The aligned reference colors at feature resolution.
    pub fn aligned_colors(&self, sketch: &SketchFrame, reference: &Frame) -> Result<FeatureMap> {
        let queries = extract_features(sketch, self.feature_scale)?;
        let keys = extract_features(reference, self.feature_scale)?;
        let values = FeatureMap::from_frame_rgb(reference).pooled(self.feature_scale);
        let attention = attention_correlation(&queries, &keys)?;
        align_features(&attention, &values, self.alpha)
    }
}

impl Translator for ReferenceTranslator {
    fn translate(&self, sketch: &SketchFrame, reference: &Frame) -> Result<Frame> {
        Error::check_dims(reference.dims(), sketch.dims())?;
        if !(0.0..=1.0).contains(&self.edge_strength) {
            return Err(Error::InvalidConfig(format!(
                "edge strength {} outside [0, 1]",
                self.edge_strength
            )));
        }
        let (w, h) = sketch.dims();
        let aligned = self.aligned_colors(sketch, reference)?;
        let mut styled = adain(&aligned.upsampled(w, h), &Self::global_style(reference))?;
        let keep = 1.0 - self.edge_strength;
        for (i, &s) in sketch.data().iter().enumerate() {
            if s == EDGE {
                for c in 0..3 {
                    styled.values[c * w * h + i] *= keep;
                }
            }
        }
        styled.to_frame()
    }
}
