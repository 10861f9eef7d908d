use super::SketchFrame;
use crate::{Error, Result};

const WORD_BITS: usize = 64;

/// A bit-packed binary mask. Bits past `width * height` in the last word are
/// always zero, so word-wise operations and popcounts need no tail handling.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    words: Vec<u64>,
}

impl BinaryMask {
    pub fn zeros(width: usize, height: usize) -> Self {
        let len = width * height;
        BinaryMask {
            width,
            height,
            words: vec![0; len.div_ceil(WORD_BITS)],
        }
    }

    pub fn ones(width: usize, height: usize) -> Self {
        let mut m = Self::zeros(width, height);
        m.words.iter_mut().for_each(|w| *w = !0);
        m.clear_tail();
        m
    }

    /// Build from one byte per pixel; any nonzero byte is a set pixel.
    pub fn from_bytes(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        if bytes.len() != width * height {
            return Err(Error::BufferLength {
                expected: width * height,
                actual: bytes.len(),
            });
        }
        Ok(Self::from_fn(width, height, |x, y| {
            bytes[y * width + x] != 0
        }))
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut m = Self::zeros(width, height);
        for y in 0..height {
            for x in 0..width {
                if f(x, y) {
                    m.set(x, y, true);
                }
            }
        }
        m
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn get_index(&self, i: usize) -> bool {
        self.words[i / WORD_BITS] >> (i % WORD_BITS) & 1 == 1
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.get_index(y * self.width + x)
    }

    pub fn set_index(&mut self, i: usize, value: bool) {
        let bit = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= bit;
        } else {
            self.words[i / WORD_BITS] &= !bit;
        }
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.set_index(y * self.width + x, value);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len()).map(|i| self.get_index(i))
    }

    /// One byte per pixel with values {0, 1}.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.iter().map(u8::from).collect()
    }

    pub fn not(&self) -> BinaryMask {
        let mut m = self.clone();
        m.words.iter_mut().for_each(|w| *w = !*w);
        m.clear_tail();
        m
    }

    fn clear_tail(&mut self) {
        let rem = self.len() % WORD_BITS;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    fn zip_with(&self, other: &BinaryMask, f: impl Fn(u64, u64) -> u64) -> Result<BinaryMask> {
        Error::check_dims(self.dims(), other.dims())?;
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(BinaryMask {
            width: self.width,
            height: self.height,
            words,
        })
    }
}

impl std::fmt::Debug for BinaryMask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "BinaryMask({}x{}, {} set)",
            self.width,
            self.height,
            self.count_ones()
        )
    }
}

pub fn mask_union(a: &BinaryMask, b: &BinaryMask) -> Result<BinaryMask> {
    a.zip_with(b, |x, y| x | y)
}

pub fn mask_intersection(a: &BinaryMask, b: &BinaryMask) -> Result<BinaryMask> {
    a.zip_with(b, |x, y| x & y)
}

/// `a \ b`: pixels set in `a` and clear in `b`.
pub fn mask_difference(a: &BinaryMask, b: &BinaryMask) -> Result<BinaryMask> {
    a.zip_with(b, |x, y| x & !y)
}

/// Recover a foreground mask from a masked sketch: set wherever the sample
/// is positive.
pub fn sign_mask(ms: &SketchFrame) -> BinaryMask {
    let w = ms.width();
    BinaryMask::from_fn(w, ms.height(), |x, y| ms.data()[y * w + x] > 0)
}
