//! Seeded synthetic surveillance clips: a static textured scene, optional
//! static fixtures and a few moving shapes, with exact instance masks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::foreground::InstanceTrack;
use crate::imaging::{BinaryMask, Frame};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    pub seed: u64,
    pub videos: usize,
    pub frames: usize,
    pub width: usize,
    pub height: usize,
    /// Moving shapes per video; each gets its own horizontal lane.
    pub movers: usize,
    /// Static rectangles that are segmented but never move.
    pub fixtures: usize,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            seed: 7,
            videos: 8,
            frames: 16,
            width: 256,
            height: 128,
            movers: 2,
            fixtures: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Rect,
    Ellipse,
}

#[derive(Debug, Clone)]
pub struct Mover {
    pub shape: Shape,
    pub color: [u8; 3],
    pub size: (usize, usize),
    /// Top-left corner per frame.
    pub positions: Vec<(isize, isize)>,
}

impl Mover {
    fn covers(&self, t: usize, x: usize, y: usize) -> bool {
        let (ox, oy) = self.positions[t];
        let (lx, ly) = (x as isize - ox, y as isize - oy);
        let (w, h) = (self.size.0 as isize, self.size.1 as isize);
        if lx < 0 || ly < 0 || lx >= w || ly >= h {
            return false;
        }
        match self.shape {
            Shape::Rect => true,
            Shape::Ellipse => {
                let nx = (lx as f64 + 0.5) / w as f64 * 2.0 - 1.0;
                let ny = (ly as f64 + 0.5) / h as f64 * 2.0 - 1.0;
                nx * nx + ny * ny <= 1.0
            }
        }
    }

    pub fn mask(&self, t: usize, width: usize, height: usize) -> BinaryMask {
        BinaryMask::from_fn(width, height, |x, y| self.covers(t, x, y))
    }
}

#[derive(Debug, Clone)]
pub struct SynthVideo {
    pub frames: Vec<Frame>,
    pub movers: Vec<Mover>,
    /// Mover tracks first (ids `mover_<i>`), then fixtures (`fixture_<i>`).
    pub tracks: Vec<InstanceTrack>,
}

fn video_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64 + 1);
    rng
}

fn background(rng: &mut ChaCha8Rng, w: usize, h: usize) -> Frame {
    let mut f = Frame::filled(w, h, [0; 3]).unwrap();
    let base: [f64; 3] = [
        rng.gen_range(60.0..110.0),
        rng.gen_range(60.0..110.0),
        rng.gen_range(60.0..110.0),
    ];
    for y in 0..h {
        for x in 0..w {
            let shade = 40.0 * y as f64 / h as f64;
            f.set_pixel(x, y, base.map(|b| (b + shade) as u8));
        }
    }
    // blocky "buildings" and pavement markings give the scene dense edges
    let blocks = (w * h / 900).max(4);
    for _ in 0..blocks {
        let bw = rng.gen_range(6..=w.clamp(7, 40));
        let bh = rng.gen_range(6..=h.clamp(7, 30));
        let x0 = rng.gen_range(0..w);
        let y0 = rng.gen_range(0..h);
        let color = [
            rng.gen_range(20..230),
            rng.gen_range(20..230),
            rng.gen_range(20..230),
        ];
        for y in y0..(y0 + bh).min(h) {
            for x in x0..(x0 + bw).min(w) {
                f.set_pixel(x, y, color);
            }
        }
    }
    let stripe = rng.gen_range(6..14);
    for y in (h / 2..h).step_by(stripe) {
        for x in 0..w {
            if (x / 10) % 2 == 0 {
                f.set_pixel(x, y, [235, 235, 210]);
            }
        }
    }
    f
}

fn make_movers(rng: &mut ChaCha8Rng, spec: &SynthSpec) -> Vec<Mover> {
    let (w, h) = (spec.width, spec.height);
    if spec.movers == 0 {
        return Vec::new();
    }
    let lane = h / spec.movers;
    (0..spec.movers)
        .map(|i| {
            let max_side = lane.saturating_sub(4).clamp(3, 28);
            let side_lo = (max_side / 2).max(2);
            let size = (
                rng.gen_range(side_lo..=max_side)
                    .min(w.saturating_sub(2).max(1)),
                rng.gen_range(side_lo..=max_side),
            );
            let shape = if rng.gen_bool(0.5) {
                Shape::Rect
            } else {
                Shape::Ellipse
            };
            let color = [
                rng.gen_range(150..=255),
                rng.gen_range(0..=90),
                rng.gen_range(90..=255),
            ];
            let lane_top = (i * lane) as f64;
            let lane_room = (lane as f64 - size.1 as f64).max(0.0);
            let x_room = (w as f64 - size.0 as f64).max(0.0);
            let mut x = rng.gen_range(0.0..=x_room);
            let mut y = lane_top + rng.gen_range(0.0..=lane_room);
            let mut vx = rng.gen_range(1.5..3.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let mut vy = rng.gen_range(-0.5..0.5);
            let positions = (0..spec.frames)
                .map(|_| {
                    let p = (x.round() as isize, y.round() as isize);
                    x += vx;
                    y += vy;
                    if x < 0.0 || x > x_room {
                        vx = -vx;
                        x = x.clamp(0.0, x_room);
                    }
                    if y < lane_top || y > lane_top + lane_room {
                        vy = -vy;
                        y = y.clamp(lane_top, lane_top + lane_room);
                    }
                    p
                })
                .collect();
            Mover {
                shape,
                color,
                size,
                positions,
            }
        })
        .collect()
}

/// Generate video `index` of the corpus described by `spec`.
pub fn generate_video(spec: &SynthSpec, index: usize) -> Result<SynthVideo> {
    let (w, h) = (spec.width, spec.height);
    if w < 16 || h < 16 || spec.frames < 2 {
        return Err(Error::InvalidConfig(format!(
            "synthetic videos need at least 16x16 pixels and 2 frames, got {w}x{h}x{}",
            spec.frames
        )));
    }
    if spec.movers > 0 && h / spec.movers < 8 {
        return Err(Error::InvalidConfig(format!(
            "{} movers do not fit in {h} rows",
            spec.movers
        )));
    }
    let mut rng = video_rng(spec.seed, index);
    let mut scene = background(&mut rng, w, h);

    let mut fixture_masks = Vec::new();
    for _ in 0..spec.fixtures {
        let (fw, fh) = (rng.gen_range(8..=16), rng.gen_range(8..=16));
        let (x0, y0) = (rng.gen_range(0..w - fw), rng.gen_range(0..h - fh));
        let color = [
            rng.gen_range(0..60),
            rng.gen_range(150..=255),
            rng.gen_range(0..60),
        ];
        for y in y0..y0 + fh {
            for x in x0..x0 + fw {
                scene.set_pixel(x, y, color);
            }
        }
        fixture_masks.push(BinaryMask::from_fn(w, h, |x, y| {
            (x0..x0 + fw).contains(&x) && (y0..y0 + fh).contains(&y)
        }));
    }

    let movers = make_movers(&mut rng, spec);
    let frames = (0..spec.frames)
        .map(|t| {
            let mut f = scene.clone();
            for m in &movers {
                for y in 0..h {
                    for x in 0..w {
                        if m.covers(t, x, y) {
                            f.set_pixel(x, y, m.color);
                        }
                    }
                }
            }
            f
        })
        .collect();

    let mut tracks = Vec::new();
    for (i, m) in movers.iter().enumerate() {
        let masks = (0..spec.frames).map(|t| m.mask(t, w, h)).collect();
        tracks.push(InstanceTrack::new(format!("mover_{}", i + 1), masks)?);
    }
    for (i, mask) in fixture_masks.into_iter().enumerate() {
        tracks.push(InstanceTrack::new(
            format!("fixture_{}", i + 1),
            vec![mask; spec.frames],
        )?);
    }
    Ok(SynthVideo {
        frames,
        movers,
        tracks,
    })
}
