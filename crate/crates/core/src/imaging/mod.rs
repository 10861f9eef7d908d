//! Pixel-level building blocks shared by the codec and the decoder.
//!
//! Sketch rasters use a three-symbol alphabet: [`BACKGROUND`] (no edge or
//! outside the foreground), [`FOREGROUND_SENTINEL`] (inside the foreground
//! but no edge) and [`EDGE`].

mod frame;
pub mod io;
mod mask;
pub mod rle;

pub use frame::{Frame, MaskedSketchFrame, SketchFrame};
pub use mask::{mask_difference, mask_intersection, mask_union, sign_mask, BinaryMask};
pub use rle::{rle_decode, rle_encode, RleBlock, Run};

pub const BACKGROUND: u8 = 0;
pub const FOREGROUND_SENTINEL: u8 = 1;
pub const EDGE: u8 = 255;
