use super::SoftMask;
use crate::imaging::Frame;
use crate::{Error, Result};

/// Blend warped history and generated content:
/// `(1 - m) · warped + m · generated`, rounded half-to-even once at the end.
pub fn compose_frame(warped: &Frame, generated: &Frame, m: &SoftMask) -> Result<Frame> {
    Error::check_dims(warped.dims(), generated.dims())?;
    Error::check_dims(warped.dims(), m.dims())?;
    let data = warped
        .data()
        .iter()
        .zip(generated.data())
        .enumerate()
        .map(|(i, (&a, &b))| {
            let w = m.values[i / Frame::CHANNELS] as f64;
            ((1.0 - w) * a as f64 + w * b as f64).round_ties_even() as u8
        })
        .collect();
    Frame::new(warped.width(), warped.height(), data)
}
