//! On-disk clip layout and instance-mask ingestion.
//!
//! ```text
//! video_<k>/frames/frame_<t>.png
//! video_<k>/masks/track_<id>/frame_<t>.png
//! ```
//!
//! Frame numbers are 1-based and zero-padded to four digits. A missing mask
//! file means the instance was not segmented in that frame. Tracks can also
//! be listed in a TOML manifest:
//!
//! ```toml
//! [[track]]
//! id = "car"
//! masks = ["car/0001.png", "", "car/0003.png"]   # "" marks a missing frame
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::foreground::{InstanceTrack, VideoGeometry};
use crate::imaging::io::{load_frame, load_mask, save_frame, save_mask};
use crate::imaging::Frame;
use crate::synth::{generate_video, SynthSpec};
use crate::{Error, Result};

pub const FRAMES_DIR: &str = "frames";
pub const MASKS_DIR: &str = "masks";
pub const TRACK_PREFIX: &str = "track_";
pub const CORPUS_SPEC_FILE: &str = "corpus.toml";

pub fn frame_file_name(t: usize) -> String {
    format!("frame_{:04}.png", t + 1)
}

pub fn video_dir_name(k: usize) -> String {
    format!("video_{:03}", k + 1)
}

fn read_dir_sorted(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut entries = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(dir, err)))
        .collect::<Result<Vec<_>>>()?;
    entries.sort();
    Ok(entries)
}

/// Parse `frame_<t>.png` into a 0-based index.
fn frame_index(path: &Path) -> Option<usize> {
    let name = path.file_name()?.to_str()?;
    let digits = name.strip_prefix("frame_")?.strip_suffix(".png")?;
    digits.parse::<usize>().ok()?.checked_sub(1)
}

/// Load `frame_0001.png`, `frame_0002.png`, ... from a directory. Numbering
/// must be contiguous from 1.
pub fn load_frame_dir(dir: impl AsRef<Path>) -> Result<Vec<Frame>> {
    let dir = dir.as_ref();
    let mut indexed: Vec<(usize, PathBuf)> = read_dir_sorted(dir)?
        .into_iter()
        .filter_map(|p| frame_index(&p).map(|i| (i, p)))
        .collect();
    indexed.sort();
    for (expected, (i, p)) in indexed.iter().enumerate() {
        if *i != expected {
            return Err(Error::Protocol(format!(
                "frame numbering gap in {}: expected {} before {}",
                dir.display(),
                frame_file_name(expected),
                p.display()
            )));
        }
    }
    if indexed.is_empty() {
        return Err(Error::Protocol(format!(
            "no frame_<t>.png files in {}",
            dir.display()
        )));
    }
    indexed.into_iter().map(|(_, p)| load_frame(p)).collect()
}

pub fn save_frame_dir(dir: impl AsRef<Path>, frames: &[Frame]) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (t, f) in frames.iter().enumerate() {
        save_frame(dir.join(frame_file_name(t)), f)?;
    }
    Ok(())
}

fn check_mask(
    path: &Path,
    mask: &crate::imaging::BinaryMask,
    geometry: VideoGeometry,
) -> Result<()> {
    if mask.dims() != (geometry.width, geometry.height) {
        return Err(Error::Protocol(format!(
            "{} is {}x{}, video is {}x{}",
            path.display(),
            mask.width(),
            mask.height(),
            geometry.width,
            geometry.height
        )));
    }
    Ok(())
}

/// Read every `track_<id>/` directory under `masks_dir`.
pub fn load_track_dirs(
    masks_dir: impl AsRef<Path>,
    geometry: VideoGeometry,
) -> Result<Vec<InstanceTrack>> {
    let masks_dir = masks_dir.as_ref();
    if !masks_dir.is_dir() {
        return Err(Error::io(
            masks_dir,
            std::io::Error::new(std::io::ErrorKind::NotFound, "mask directory not found"),
        ));
    }
    let mut tracks = Vec::new();
    for dir in read_dir_sorted(masks_dir)? {
        let Some(id) = dir
            .file_name()
            .and_then(|n| n.to_str())
            .and_then(|n| n.strip_prefix(TRACK_PREFIX))
        else {
            continue;
        };
        if !dir.is_dir() {
            continue;
        }
        let mut slots = vec![None; geometry.frames];
        for path in read_dir_sorted(&dir)? {
            let Some(t) = frame_index(&path) else {
                continue;
            };
            if t >= geometry.frames {
                return Err(Error::Protocol(format!(
                    "{} is beyond the video's {} frames",
                    path.display(),
                    geometry.frames
                )));
            }
            let mask = load_mask(&path)?;
            check_mask(&path, &mask, geometry)?;
            slots[t] = Some(mask);
        }
        tracks.push(InstanceTrack::from_sparse(id, geometry, slots)?);
    }
    Ok(tracks)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    #[serde(default)]
    track: Vec<ManifestTrack>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestTrack {
    id: String,
    masks: Vec<String>,
}

/// Read tracks from a TOML manifest; mask paths are relative to the manifest.
pub fn load_track_manifest(
    path: impl AsRef<Path>,
    geometry: VideoGeometry,
) -> Result<Vec<InstanceTrack>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let manifest: Manifest = toml::from_str(&text).map_err(|e| Error::Sidecar {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    manifest
        .track
        .into_iter()
        .map(|t| {
            if t.masks.len() != geometry.frames {
                return Err(Error::Protocol(format!(
                    "{}: track {} lists {} masks, video has {} frames",
                    path.display(),
                    t.id,
                    t.masks.len(),
                    geometry.frames
                )));
            }
            let slots = t
                .masks
                .iter()
                .map(|rel| {
                    if rel.is_empty() {
                        return Ok(None);
                    }
                    let p = base.join(rel);
                    let mask = load_mask(&p)?;
                    check_mask(&p, &mask, geometry)?;
                    Ok(Some(mask))
                })
                .collect::<Result<Vec<_>>>()?;
            InstanceTrack::from_sparse(t.id, geometry, slots)
        })
        .collect()
}

/// Write the full synthetic corpus under `root`, plus the spec that made it.
pub fn write_synth_corpus(root: impl AsRef<Path>, spec: &SynthSpec) -> Result<Vec<PathBuf>> {
    let root = root.as_ref();
    fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
    let spec_path = root.join(CORPUS_SPEC_FILE);
    let text = toml::to_string(spec).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    fs::write(&spec_path, text).map_err(|e| Error::io(&spec_path, e))?;
    let mut dirs = Vec::new();
    for k in 0..spec.videos {
        let video = generate_video(spec, k)?;
        let dir = root.join(video_dir_name(k));
        save_frame_dir(dir.join(FRAMES_DIR), &video.frames)?;
        let masks = dir.join(MASKS_DIR);
        fs::create_dir_all(&masks).map_err(|e| Error::io(&masks, e))?;
        for track in &video.tracks {
            let tdir = masks.join(format!("{TRACK_PREFIX}{}", track.id));
            fs::create_dir_all(&tdir).map_err(|e| Error::io(&tdir, e))?;
            for (t, m) in track.masks().iter().enumerate() {
                save_mask(tdir.join(frame_file_name(t)), m)?;
            }
        }
        dirs.push(dir);
    }
    Ok(dirs)
}

/// `video_*` directories under a corpus root, sorted by name.
pub fn list_videos(root: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    Ok(read_dir_sorted(root.as_ref())?
        .into_iter()
        .filter(|p| {
            p.is_dir()
                && p.file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.starts_with("video_"))
        })
        .collect())
}
