//! The `MSV1` byte stream.
//!
//! ```text
//! "MSV1" | u16 version | u16 width | u16 height | u16 frame_count | u8 fps | u8 flags
//! | u32 len + PNG reference frame
//! | u32 len + RLE first keyframe | u32 len + RLE last keyframe
//! | frame_count × (u32 len + RLE frame)
//! ```
//!
//! All integers are little-endian. With [`FLAG_FULL_SKETCH`] set the frames
//! are unmasked sketches and both keyframe sections are empty; this variant
//! exists so full sketch videos can be sized with the same serialization.

use super::{MaskedSketchVideo, SketchVideo};
use crate::imaging::io::{decode_png, encode_png};
use crate::imaging::{rle_decode, rle_encode, Frame, RleBlock, SketchFrame};
use crate::{Error, Result};

pub const MAGIC: [u8; 4] = *b"MSV1";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 14;
pub const FLAG_FULL_SKETCH: u8 = 0b0000_0001;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Header {
    pub version: u16,
    pub width: u16,
    pub height: u16,
    pub frame_count: u16,
    pub fps: u8,
    pub flags: u8,
}

fn to_u16(value: usize, what: &str) -> Result<u16> {
    u16::try_from(value).map_err(|_| {
        Error::Protocol(format!(
            "{what} {value} does not fit the container's u16 field"
        ))
    })
}

fn push_section(out: &mut Vec<u8>, payload: &[u8]) -> Result<()> {
    let len = u32::try_from(payload.len())
        .map_err(|_| Error::Protocol(format!("section of {} bytes is too large", payload.len())))?;
    out.extend_from_slice(&len.to_le_bytes());
    out.extend_from_slice(payload);
    Ok(())
}

fn write_stream<'a>(
    header: Header,
    reference: &Frame,
    keyframes: Option<(&SketchFrame, &SketchFrame)>,
    frames: impl Iterator<Item = &'a SketchFrame>,
) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    out.extend_from_slice(&MAGIC);
    for v in [
        header.version,
        header.width,
        header.height,
        header.frame_count,
    ] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.push(header.fps);
    out.push(header.flags);
    push_section(&mut out, &encode_png(reference)?)?;
    match keyframes {
        Some((first, last)) => {
            push_section(&mut out, &rle_encode(first).to_bytes())?;
            push_section(&mut out, &rle_encode(last).to_bytes())?;
        }
        None => {
            push_section(&mut out, &[])?;
            push_section(&mut out, &[])?;
        }
    }
    for f in frames {
        push_section(&mut out, &rle_encode(f).to_bytes())?;
    }
    Ok(out)
}

fn header_for(width: usize, height: usize, frames: usize, fps: u8, flags: u8) -> Result<Header> {
    Ok(Header {
        version: VERSION,
        width: to_u16(width, "width")?,
        height: to_u16(height, "height")?,
        frame_count: to_u16(frames, "frame count")?,
        fps,
        flags,
    })
}

pub fn encode_container(v: &MaskedSketchVideo) -> Result<Vec<u8>> {
    v.validate()?;
    let (w, h) = v.dims();
    let header = header_for(w, h, v.frame_count(), v.fps, 0)?;
    write_stream(
        header,
        &v.reference_frame,
        Some((&v.keyframe_first, &v.keyframe_last)),
        v.masked_frames.iter(),
    )
}

/// Serialize a full sketch video alongside its reference frame.
pub fn encode_sketch_container(v: &SketchVideo, reference: &Frame) -> Result<Vec<u8>> {
    v.validate()?;
    Error::check_dims(v.dims(), reference.dims())?;
    let (w, h) = v.dims();
    let header = header_for(w, h, v.frames.len(), v.fps, FLAG_FULL_SKETCH)?;
    write_stream(header, reference, None, v.frames.iter())
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let available = self.bytes.len() - self.pos;
        if n > available {
            return Err(Error::Truncated {
                offset: self.pos,
                needed: n,
                available,
            });
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        let b = self.take(2)?;
        Ok(u16::from_le_bytes([b[0], b[1]]))
    }

    fn section(&mut self) -> Result<&'a [u8]> {
        let b = self.take(4)?;
        let len = u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as usize;
        self.take(len)
    }

    fn sketch(&mut self, w: usize, h: usize) -> Result<SketchFrame> {
        rle_decode(&RleBlock::from_bytes(self.section()?)?, w, h)
    }
}

pub fn read_header(bytes: &[u8]) -> Result<Header> {
    let mut r = Reader { bytes, pos: 0 };
    read_header_from(&mut r)
}

fn read_header_from(r: &mut Reader<'_>) -> Result<Header> {
    let magic = r.take(4)?;
    if magic != MAGIC {
        return Err(Error::BadMagic([magic[0], magic[1], magic[2], magic[3]]));
    }
    let version = r.u16()?;
    if version != VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let header = Header {
        version,
        width: r.u16()?,
        height: r.u16()?,
        frame_count: r.u16()?,
        fps: r.u8()?,
        flags: r.u8()?,
    };
    if header.flags & !FLAG_FULL_SKETCH != 0 {
        return Err(Error::Protocol(format!(
            "unknown container flags {:#04x}",
            header.flags
        )));
    }
    if header.width == 0 || header.height == 0 {
        return Err(Error::InvalidDimensions {
            width: header.width as usize,
            height: header.height as usize,
        });
    }
    Ok(header)
}

fn read_reference(r: &mut Reader<'_>, w: usize, h: usize) -> Result<Frame> {
    let reference = decode_png(r.section()?)?;
    Error::check_dims((w, h), reference.dims())?;
    Ok(reference)
}

fn expect_end(r: &Reader<'_>) -> Result<()> {
    if r.pos != r.bytes.len() {
        return Err(Error::CorruptPayload(format!(
            "{} trailing bytes after the last frame",
            r.bytes.len() - r.pos
        )));
    }
    Ok(())
}

pub fn decode_container(bytes: &[u8]) -> Result<MaskedSketchVideo> {
    let mut r = Reader { bytes, pos: 0 };
    let header = read_header_from(&mut r)?;
    if header.flags & FLAG_FULL_SKETCH != 0 {
        return Err(Error::Protocol(
            "container holds full sketches, not masked sketches".into(),
        ));
    }
    let (w, h) = (header.width as usize, header.height as usize);
    let reference_frame = read_reference(&mut r, w, h)?;
    let keyframe_first = r.sketch(w, h)?;
    let keyframe_last = r.sketch(w, h)?;
    let masked_frames = (0..header.frame_count)
        .map(|_| r.sketch(w, h))
        .collect::<Result<Vec<_>>>()?;
    expect_end(&r)?;
    let v = MaskedSketchVideo {
        masked_frames,
        keyframe_first,
        keyframe_last,
        reference_frame,
        fps: header.fps,
    };
    v.validate()?;
    Ok(v)
}

pub fn decode_sketch_container(bytes: &[u8]) -> Result<(SketchVideo, Frame)> {
    let mut r = Reader { bytes, pos: 0 };
    let header = read_header_from(&mut r)?;
    if header.flags & FLAG_FULL_SKETCH == 0 {
        return Err(Error::Protocol("container holds masked sketches".into()));
    }
    let (w, h) = (header.width as usize, header.height as usize);
    let reference = read_reference(&mut r, w, h)?;
    for _ in 0..2 {
        if !r.section()?.is_empty() {
            return Err(Error::CorruptPayload(
                "full-sketch container carries keyframe data".into(),
            ));
        }
    }
    let frames = (0..header.frame_count)
        .map(|_| r.sketch(w, h))
        .collect::<Result<Vec<_>>>()?;
    expect_end(&r)?;
    Ok((SketchVideo::new(frames, header.fps)?, reference))
}
