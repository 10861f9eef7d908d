//! The five subcommands. Each returns its result so callers other than the
//! binary (tests, scripts) can inspect it.

use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use msv_core::codec::{decode_container, encode_container, encode_video};
use msv_core::corpus::{
    list_videos, load_frame_dir, load_track_dirs, load_track_manifest, save_frame_dir,
    write_synth_corpus, FRAMES_DIR, MASKS_DIR,
};
use msv_core::decoder::decode_video;
use msv_core::foreground::{InstanceTrack, VideoGeometry};
use msv_core::imaging::Frame;
use msv_core::metrics::{evaluate_video, size_report, QualityReport, SizeReport};
use msv_core::Error;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{CliError, PipelineConfig};

type CliResult<T> = std::result::Result<T, CliError>;

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| Error::Protocol(e.to_string()))?;
    text.push('\n');
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn geometry(frames: &[Frame]) -> VideoGeometry {
    let (width, height) = frames.first().map(Frame::dims).unwrap_or((0, 0));
    VideoGeometry {
        width,
        height,
        frames: frames.len(),
    }
}

/// Frames and instance tracks of one corpus video. Tracks come from
/// `manifest` when given, otherwise from the video's `masks/` directory.
fn load_video(dir: &Path, manifest: Option<&Path>) -> CliResult<(Vec<Frame>, Vec<InstanceTrack>)> {
    let frames = load_frame_dir(dir.join(FRAMES_DIR))?;
    let geometry = geometry(&frames);
    let tracks = match manifest {
        Some(m) => load_track_manifest(m, geometry)?,
        None => load_track_dirs(dir.join(MASKS_DIR), geometry)?,
    };
    Ok((frames, tracks))
}

pub fn cmd_synth(out: &Path, cfg: &PipelineConfig) -> CliResult<Vec<PathBuf>> {
    let dirs = write_synth_corpus(out, &cfg.synth)?;
    info!("wrote {} synthetic videos to {}", dirs.len(), out.display());
    Ok(dirs)
}

/// Encode one video directory into a container file; returns its size.
pub fn cmd_encode(
    video: &Path,
    manifest: Option<&Path>,
    out: &Path,
    cfg: &PipelineConfig,
) -> CliResult<u64> {
    let (frames, tracks) = load_video(video, manifest)?;
    let encoded = encode_video(&frames, &tracks, &cfg.encoder)?;
    info!(
        "{} of {} tracks classified as foreground",
        encoded.foreground.tracks.len(),
        tracks.len()
    );
    let bytes = encode_container(&encoded.masked)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(out, &bytes).map_err(|e| Error::io(out, e))?;
    Ok(bytes.len() as u64)
}

/// Decode a container file into a directory of numbered PNG frames.
pub fn cmd_decode(input: &Path, out: &Path, cfg: &PipelineConfig) -> CliResult<usize> {
    let bytes = fs::read(input).map_err(|e| Error::io(input, e))?;
    let msv = decode_container(&bytes)?;
    let frames = decode_video(&msv, &cfg.decoder)?;
    save_frame_dir(out, &frames)?;
    Ok(frames.len())
}

pub fn cmd_evaluate(
    original: &Path,
    decoded: &Path,
    out: Option<&Path>,
    cfg: &PipelineConfig,
) -> CliResult<QualityReport> {
    let a = load_frame_dir(original)?;
    let b = load_frame_dir(decoded)?;
    let report = evaluate_video(&a, &b, &cfg.ssim)?;
    if let Some(out) = out {
        write_json(out, &report)?;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoRecord {
    /// Directory name inside the corpus, never a full path.
    pub video: String,
    pub frames: usize,
    pub width: usize,
    pub height: usize,
    pub foreground_tracks: usize,
    /// Largest per-frame share of pixels inside the foreground mask.
    pub max_foreground_fraction: f64,
    pub mean_foreground_fraction: f64,
    pub size: SizeReport,
    pub quality: QualityReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub videos: Vec<VideoRecord>,
    pub mean_masked_to_sketch: f64,
    pub mean_masked_to_raw: f64,
    pub mean_psnr: f64,
    pub mean_ssim: f64,
}

fn report_video(dir: &Path, cfg: &PipelineConfig) -> CliResult<VideoRecord> {
    let (frames, tracks) = load_video(dir, None)?;
    let encoded = encode_video(&frames, &tracks, &cfg.encoder)?;
    let size = size_report(&frames, &encoded.sketch, &encoded.masked)?;
    let decoded = decode_video(&encoded.masked, &cfg.decoder)?;
    let quality = evaluate_video(&frames, &decoded, &cfg.ssim)?;
    let g = geometry(&frames);
    let area = (g.width * g.height) as f64;
    let fractions: Vec<f64> = encoded
        .foreground_masks
        .iter()
        .map(|m| m.count_ones() as f64 / area)
        .collect();
    Ok(VideoRecord {
        video: dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
        frames: g.frames,
        width: g.width,
        height: g.height,
        foreground_tracks: encoded.foreground.tracks.len(),
        max_foreground_fraction: fractions.iter().copied().fold(0.0, f64::max),
        mean_foreground_fraction: fractions.iter().sum::<f64>() / fractions.len() as f64,
        size,
        quality,
    })
}

/// Encode, decode and score every video of a corpus.
pub fn cmd_report(
    corpus: &Path,
    out: Option<&Path>,
    cfg: &PipelineConfig,
) -> CliResult<CorpusReport> {
    let dirs = list_videos(corpus)?;
    if dirs.is_empty() {
        return Err(
            Error::Protocol(format!("no video_* directories under {}", corpus.display())).into(),
        );
    }
    let videos = dirs
        .par_iter()
        .map(|d| report_video(d, cfg))
        .collect::<CliResult<Vec<_>>>()?;
    let n = videos.len() as f64;
    let mean = |f: fn(&VideoRecord) -> f64| videos.iter().map(f).sum::<f64>() / n;
    let report = CorpusReport {
        mean_masked_to_sketch: mean(|v| v.size.masked_to_sketch),
        mean_masked_to_raw: mean(|v| v.size.masked_to_raw),
        mean_psnr: mean(|v| v.quality.mean_psnr),
        mean_ssim: mean(|v| v.quality.mean_ssim),
        videos,
    };
    if let Some(out) = out {
        write_json(out, &report)?;
    }
    Ok(report)
}
