use crate::imaging::{Frame, SketchFrame};
use crate::{Error, Result};

/// Per-pixel displacement pointing from a pixel of the current frame to its
/// source location in the previous frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    pub width: usize,
    pub height: usize,
    pub dx: Vec<f32>,
    pub dy: Vec<f32>,
}

impl FlowField {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self::uniform(width, height, 0.0, 0.0)
    }

    pub fn uniform(width: usize, height: usize, dx: f32, dy: f32) -> Self {
        FlowField {
            width,
            height,
            dx: vec![dx; width * height],
            dy: vec![dy; width * height],
        }
    }

    pub fn new(width: usize, height: usize, dx: Vec<f32>, dy: Vec<f32>) -> Result<Self> {
        for v in [&dx, &dy] {
            if v.len() != width * height {
                return Err(Error::BufferLength {
                    expected: width * height,
                    actual: v.len(),
                });
            }
        }
        if dx.iter().chain(&dy).any(|v| !v.is_finite()) {
            return Err(Error::CorruptPayload(
                "flow contains non-finite values".into(),
            ));
        }
        Ok(FlowField {
            width,
            height,
            dx,
            dy,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn at(&self, x: usize, y: usize) -> (f32, f32) {
        let i = y * self.width + x;
        (self.dx[i], self.dy[i])
    }

    pub fn is_zero(&self) -> bool {
        self.dx.iter().chain(&self.dy).all(|&v| v == 0.0)
    }
}

/// Predicts the flow that warps the previous generated frame onto the
/// current one. `history` holds the most recent generated frames (oldest
/// first); `sketches` holds the matching sketches followed by the current
/// frame's sketch.
pub trait FlowEstimator: Send + Sync {
    fn estimate(&self, history: &[Frame], sketches: &[SketchFrame]) -> Result<FlowField>;
}

fn check_history(history: &[Frame], sketches: &[SketchFrame]) -> Result<(usize, usize)> {
    let last = history.last().ok_or_else(|| {
        Error::Protocol("flow estimation needs at least one previous frame".into())
    })?;
    if sketches.len() < 2 {
        return Err(Error::Protocol(
            "flow estimation needs the previous and current sketches".into(),
        ));
    }
    let dims = last.dims();
    for f in history {
        Error::check_dims(dims, f.dims())?;
    }
    for s in sketches {
        Error::check_dims(dims, s.dims())?;
    }
    Ok(dims)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroFlow;

impl FlowEstimator for ZeroFlow {
    fn estimate(&self, history: &[Frame], sketches: &[SketchFrame]) -> Result<FlowField> {
        let (w, h) = check_history(history, sketches)?;
        Ok(FlowField::zeros(w, h))
    }
}

/// Exhaustive block search on the two most recent sketches, minimizing the
/// sum of absolute differences. Equal costs prefer the displacement closest
/// to zero.
#[derive(Debug, Clone, Copy)]
pub struct BlockMatching {
    pub block_size: usize,
    pub search_radius: usize,
}

impl Default for BlockMatching {
    fn default() -> Self {
        BlockMatching {
            block_size: 8,
            search_radius: 4,
        }
    }
}

impl BlockMatching {
    /// Best displacement for the block with top-left corner `(bx, by)`.
    pub fn match_block(
        &self,
        prev: &SketchFrame,
        cur: &SketchFrame,
        bx: usize,
        by: usize,
    ) -> (i32, i32) {
        let (w, h) = cur.dims();
        let bw = self.block_size.min(w - bx);
        let bh = self.block_size.min(h - by);
        let r = self.search_radius as i32;
        let mut best = (u64::MAX, 0u32, (0i32, 0i32));
        for dy in -r..=r {
            for dx in -r..=r {
                let mut sad = 0u64;
                for y in by..by + bh {
                    let sy = (y as i32 + dy).clamp(0, h as i32 - 1) as usize;
                    for x in bx..bx + bw {
                        let sx = (x as i32 + dx).clamp(0, w as i32 - 1) as usize;
                        sad += cur.get(x, y).abs_diff(prev.get(sx, sy)) as u64;
                    }
                }
                let dist = dx.unsigned_abs() + dy.unsigned_abs();
                if (sad, dist) < (best.0, best.1) {
                    best = (sad, dist, (dx, dy));
                }
            }
        }
        best.2
    }
}

impl FlowEstimator for BlockMatching {
    fn estimate(&self, history: &[Frame], sketches: &[SketchFrame]) -> Result<FlowField> {
        let (w, h) = check_history(history, sketches)?;
        if self.block_size == 0 {
            return Err(Error::InvalidConfig("block size must be positive".into()));
        }
        let cur = &sketches[sketches.len() - 1];
        let prev = &sketches[sketches.len() - 2];
        let mut flow = FlowField::zeros(w, h);
        for by in (0..h).step_by(self.block_size) {
            for bx in (0..w).step_by(self.block_size) {
                let (dx, dy) = self.match_block(prev, cur, bx, by);
                for y in by..(by + self.block_size).min(h) {
                    for x in bx..(bx + self.block_size).min(w) {
                        flow.dx[y * w + x] = dx as f32;
                        flow.dy[y * w + x] = dy as f32;
                    }
                }
            }
        }
        Ok(flow)
    }
}
