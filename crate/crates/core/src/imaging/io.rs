//! Lossless PNG interchange for frames, sketches and masks.
//!
//! Only 8-bit rasters are accepted. Masks are written as black (0) and
//! white (255) and read back with a mid-gray threshold.

use std::io::Cursor;
use std::path::{Path, PathBuf};

use image::{ColorType, DynamicImage, ExtendedColorType, ImageEncoder, ImageFormat};

use super::{BinaryMask, Frame, SketchFrame};
use crate::{Error, Result};

fn open(path: &Path) -> Result<DynamicImage> {
    let reader = image::ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    reader.decode().map_err(|e| image_error(path, e))
}

fn image_error(path: &Path, e: image::ImageError) -> Error {
    match e {
        image::ImageError::Unsupported(u) => Error::UnsupportedFormat {
            path: path.to_path_buf(),
            reason: u.to_string(),
        },
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::Image {
            path: path.to_path_buf(),
            source: other,
        },
    }
}

fn require_8bit(path: &Path, img: &DynamicImage) -> Result<()> {
    match img.color() {
        ColorType::L8 | ColorType::La8 | ColorType::Rgb8 | ColorType::Rgba8 => Ok(()),
        other => Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            reason: format!("{other:?} samples; only 8-bit images are supported"),
        }),
    }
}

fn to_frame(path: &Path, img: DynamicImage) -> Result<Frame> {
    require_8bit(path, &img)?;
    let rgb = img.into_rgb8();
    let (w, h) = rgb.dimensions();
    Frame::new(w as usize, h as usize, rgb.into_raw())
}

fn to_sketch(path: &Path, img: DynamicImage) -> Result<SketchFrame> {
    require_8bit(path, &img)?;
    let luma = img.into_luma8();
    let (w, h) = luma.dimensions();
    SketchFrame::new(w as usize, h as usize, luma.into_raw())
}

/// Load an 8-bit image as RGB. Grayscale inputs are replicated across channels.
pub fn load_frame(path: impl AsRef<Path>) -> Result<Frame> {
    let path = path.as_ref();
    to_frame(path, open(path)?)
}

/// Load an 8-bit grayscale image without altering its samples.
pub fn load_sketch(path: impl AsRef<Path>) -> Result<SketchFrame> {
    let path = path.as_ref();
    to_sketch(path, open(path)?)
}

pub fn load_mask(path: impl AsRef<Path>) -> Result<BinaryMask> {
    let s = load_sketch(path)?;
    let w = s.width();
    Ok(BinaryMask::from_fn(w, s.height(), |x, y| {
        s.data()[y * w + x] >= 128
    }))
}

fn write_png(path: &Path, data: &[u8], w: usize, h: usize, color: ExtendedColorType) -> Result<()> {
    image::save_buffer_with_format(path, data, w as u32, h as u32, color, ImageFormat::Png)
        .map_err(|e| image_error(path, e))
}

pub fn save_frame(path: impl AsRef<Path>, frame: &Frame) -> Result<()> {
    write_png(
        path.as_ref(),
        frame.data(),
        frame.width(),
        frame.height(),
        ExtendedColorType::Rgb8,
    )
}

pub fn save_sketch(path: impl AsRef<Path>, sketch: &SketchFrame) -> Result<()> {
    write_png(
        path.as_ref(),
        sketch.data(),
        sketch.width(),
        sketch.height(),
        ExtendedColorType::L8,
    )
}

pub fn save_mask(path: impl AsRef<Path>, mask: &BinaryMask) -> Result<()> {
    let bytes: Vec<u8> = mask.iter().map(|b| if b { 255 } else { 0 }).collect();
    write_png(
        path.as_ref(),
        &bytes,
        mask.width(),
        mask.height(),
        ExtendedColorType::L8,
    )
}

fn memory_path() -> PathBuf {
    PathBuf::from("<memory>")
}

/// Encode a frame as an in-memory PNG stream.
pub fn encode_png(frame: &Frame) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    image::codecs::png::PngEncoder::new(&mut out)
        .write_image(
            frame.data(),
            frame.width() as u32,
            frame.height() as u32,
            ExtendedColorType::Rgb8,
        )
        .map_err(|e| image_error(&memory_path(), e))?;
    Ok(out)
}

pub fn decode_png(bytes: &[u8]) -> Result<Frame> {
    let img = image::ImageReader::with_format(Cursor::new(bytes), ImageFormat::Png)
        .decode()
        .map_err(|e| image_error(&memory_path(), e))?;
    to_frame(&memory_path(), img)
}
