//! Masked-sketch semantic video codec.
//!
//! The encoder turns a surveillance clip into a binary sketch video, keeps
//! only the sketch pixels that belong to moving instances, and packs them
//! together with two keyframe sketches and the first color frame into a
//! compact run-length container. The decoder rebuilds the full sketch of
//! every frame from that container and regenerates color frames by warping
//! the previously generated frame and filling occluded regions with an
//! exemplar-guided translation of the current sketch.
//!
//! Module map:
//!
//! * [`imaging`]: frames, sketches, bit-packed masks, run-length coding, PNG I/O.
//! * [`foreground`]: temporal IoU of instance tracks and per-frame foreground masks.
//! * [`codec`]: sketch extraction, masking, reconstruction and the `MSV1` container.
//! * [`decoder`]: flow, warping, occlusion masks, attention alignment, AdaIN and
//!   the frame recurrence.
//! * [`metrics`]: PSNR, SSIM and container size accounting.
//! * [`corpus`]: on-disk clip layout and instance-mask ingestion.
//! * [`synth`]: seeded synthetic surveillance corpora with ground-truth masks.
//! * [`tensor`]: raw `f32` tensor files used to plug external estimator outputs in.

pub mod codec;
pub mod corpus;
pub mod decoder;
mod error;
pub mod foreground;
pub mod imaging;
pub mod metrics;
pub mod synth;
pub mod tensor;

pub use error::{Error, Result};
