//! Pipeline configuration file and command-line overrides.

use std::path::Path;

use msv_core::codec::{EdgeExtractorConfig, EncoderConfig};
use msv_core::decoder::{DecoderConfig, FlowMethod, OcclusionMethod};
use msv_core::metrics::SsimConfig;
use msv_core::synth::SynthSpec;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub encoder: EncoderConfig,
    pub decoder: DecoderConfig,
    pub ssim: SsimConfig,
    pub synth: SynthSpec,
}

/// Values given on the command line; `None` leaves the file value alone.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub iou_threshold: Option<f64>,
    pub alpha: Option<f64>,
    pub flow: Option<FlowMethod>,
    pub occlusion: Option<OcclusionMethod>,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }

    /// File (or defaults) first, flags on top, then validated.
    pub fn resolve(path: Option<&Path>, overrides: &Overrides) -> Result<Self, CliError> {
        let mut cfg = match path {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        cfg.apply(overrides);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.synth.seed = seed;
        }
        if let Some(t) = o.iou_threshold {
            self.encoder.iou_threshold = t;
        }
        if let Some(a) = o.alpha {
            self.decoder.alpha = a;
        }
        if let Some(f) = o.flow {
            self.decoder.flow = f;
        }
        if let Some(m) = o.occlusion {
            self.decoder.occlusion = m;
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let usage = |e: msv_core::Error| CliError::Usage(e.to_string());
        let t = self.encoder.iou_threshold;
        if !(t > 0.0 && t <= 1.0) {
            return Err(CliError::Usage(format!("IoU threshold {t} outside (0, 1]")));
        }
        if self.encoder.fps == 0 {
            return Err(CliError::Usage("fps must be positive".into()));
        }
        self.encoder.edge.validate().map_err(usage)?;
        self.decoder.validate().map_err(usage)?;
        let s = &self.synth;
        if s.frames < 2 || s.width == 0 || s.height == 0 {
            return Err(CliError::Usage(format!(
                "synthetic videos need at least 2 frames and a nonempty frame, got {}x{}x{}",
                s.frames, s.width, s.height
            )));
        }
        Ok(())
    }

    pub fn edge(&self) -> &EdgeExtractorConfig {
        &self.encoder.edge
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).unwrap_or_else(|e| format!("<unprintable config: {e}>"))
    }
}
