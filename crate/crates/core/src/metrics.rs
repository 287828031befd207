//! Compression and data-loss accounting, and the stride sweep benchmark.
//!
//! Compression is measured against raw RGB bytes (`3 * W * H` per frame).
//! Data loss is the percentage of channel samples that differ from the
//! original after decompression.

use std::fmt::Write as _;
use std::time::Instant;

use thiserror::Error;

use crate::codec::{compress_video, decompress_video, CompressConfig, ModeConfig, ShiftSource, TrackerSource, R2SStream};
use crate::container::{record_size, serialized_size};
use crate::frame_io::{Frame, FrameSequence};
use crate::tracking::{estimate_global_shift_hinted, estimate_grid_shifts, plan_windows, Shift, Trajectories};

pub const SWEEP_CSV_HEADER: &str = "stride,compression_pct,loss_pct,ms_per_frame";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("sequences differ in shape: {0}")]
    ShapeMismatch(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameMetrics {
    pub frame_index: usize,
    pub stored_bytes: usize,
    pub original_bytes: usize,
    pub compression_pct: f64,
    pub loss_pct: Option<f64>,
    pub mae: Option<f64>,
    pub time_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub stored_bytes: usize,
    pub original_bytes: usize,
    pub compression_pct: f64,
    pub loss_pct: Option<f64>,
    pub mae: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub frames: Vec<FrameMetrics>,
    pub aggregate: Aggregate,
}

/// `100 * (1 - stored / original)`, unclamped.
pub fn percent_saved(stored: usize, original: usize) -> f64 {
    100.0 * (1.0 - stored as f64 / original as f64)
}

/// Per-frame stored bytes are the serialized record sizes (the raw first
/// frame counts its raster only); the aggregate compares the whole container,
/// header included, against the raw baseline. A single-frame stream comes
/// out slightly negative.
pub fn compression_percent(stream: &R2SStream) -> MetricsReport {
    let original = 3 * stream.width * stream.height;
    let sizes = std::iter::once(original).chain(stream.frames.iter().map(record_size));
    let frames = sizes
        .enumerate()
        .map(|(frame_index, stored)| FrameMetrics {
            frame_index,
            stored_bytes: stored,
            original_bytes: original,
            compression_pct: percent_saved(stored, original),
            loss_pct: None,
            mae: None,
            time_ms: None,
        })
        .collect();
    let total_original = original * stream.frame_count();
    let total_stored = serialized_size(stream);
    MetricsReport {
        frames,
        aggregate: Aggregate {
            stored_bytes: total_stored,
            original_bytes: total_original,
            compression_pct: percent_saved(total_stored, total_original),
            loss_pct: None,
            mae: None,
        },
    }
}

/// `(loss_pct, mae)` for one frame pair of equal shape.
pub fn frame_loss(original: &Frame, recon: &Frame) -> (f64, f64) {
    let a = original.pixels();
    let b = recon.pixels();
    let (mut differing, mut abs) = (0usize, 0u64);
    for (&x, &y) in a.iter().zip(b) {
        let d = x.abs_diff(y);
        differing += (d != 0) as usize;
        abs += d as u64;
    }
    let n = a.len() as f64;
    (100.0 * differing as f64 / n, abs as f64 / n)
}

pub fn data_loss_percent(original: &FrameSequence, recon: &FrameSequence) -> Result<MetricsReport, MetricsError> {
    if original.len() != recon.len() {
        return Err(MetricsError::ShapeMismatch(format!(
            "{} frames vs {}",
            original.len(),
            recon.len()
        )));
    }
    if original.width() != recon.width() || original.height() != recon.height() {
        return Err(MetricsError::ShapeMismatch(format!(
            "{}x{} vs {}x{}",
            original.width(),
            original.height(),
            recon.width(),
            recon.height()
        )));
    }
    let bytes = 3 * original.width() * original.height();
    let frames: Vec<FrameMetrics> = original
        .frames()
        .iter()
        .zip(recon.frames())
        .enumerate()
        .map(|(frame_index, (a, b))| {
            let (loss, mae) = frame_loss(a, b);
            FrameMetrics {
                frame_index,
                stored_bytes: bytes,
                original_bytes: bytes,
                compression_pct: 0.0,
                loss_pct: Some(loss),
                mae: Some(mae),
                time_ms: None,
            }
        })
        .collect();
    let n = frames.len() as f64;
    let loss = frames.iter().filter_map(|f| f.loss_pct).sum::<f64>() / n;
    let mae = frames.iter().filter_map(|f| f.mae).sum::<f64>() / n;
    Ok(MetricsReport {
        frames,
        aggregate: Aggregate {
            stored_bytes: bytes * original.len(),
            original_bytes: bytes * original.len(),
            compression_pct: 0.0,
            loss_pct: Some(loss),
            mae: Some(mae),
        },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepSource {
    /// Built-in estimator with drift emulation: each window measures the
    /// shift once, at its first frame pair, and reuses it for every frame it
    /// supplies.
    Builtin { radius: u32 },
    /// One external trajectory set per stride, in the order of `strides`.
    External(Vec<Trajectories>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub mode: ModeConfig,
    pub source: SweepSource,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub stride: usize,
    pub compression_pct: f64,
    pub loss_pct: f64,
    pub ms_per_frame: f64,
}

/// Shifts a windowed tracker would report: one measurement per window,
/// held constant across the frames that window supplies.
pub fn windowed_shifts(seq: &FrameSequence, stride: usize, mode: &ModeConfig, radius: u32) -> Result<Trajectories, crate::Error> {
    let frames = seq.frames();
    let n = frames.len();
    let (w, h) = (seq.width(), seq.height());
    let plan = plan_windows(n, stride)?;
    match mode {
        ModeConfig::Global => {
            let radius = radius.min(w.min(h) as u32 - 1);
            let mut shifts = vec![Shift::ZERO; n];
            let mut hint = None;
            for g in 0..plan.windows.len() {
                let supplied = plan.supplied(g);
                let anchor = supplied.start.max(1);
                if anchor >= n || anchor >= supplied.end {
                    continue;
                }
                let v = estimate_global_shift_hinted(&frames[anchor - 1], &frames[anchor], radius, hint)?;
                hint = Some(v);
                for s in &mut shifts[anchor..supplied.end] {
                    *s = v;
                }
            }
            Ok(Trajectories::from_global(shifts))
        }
        ModeConfig::Grid { grid, .. } => {
            let blocks = grid.block_count(w, h);
            let mut per_frame = vec![vec![Shift::ZERO; blocks]; n];
            for g in 0..plan.windows.len() {
                let supplied = plan.supplied(g);
                let anchor = supplied.start.max(1);
                if anchor >= n || anchor >= supplied.end {
                    continue;
                }
                // infinite tau keeps every block's best shift
                let field = estimate_grid_shifts(&frames[anchor - 1], &frames[anchor], *grid, radius, f64::INFINITY)?;
                for f in &mut per_frame[anchor..supplied.end] {
                    f.copy_from_slice(field.shifts());
                }
            }
            Ok(Trajectories::from_frames(blocks, per_frame))
        }
    }
}

/// Compresses and decompresses `seq` once per stride, reporting aggregate
/// compression, aggregate loss and wall time per frame.
pub fn stride_sweep(seq: &FrameSequence, strides: &[usize], config: &SweepConfig) -> Result<Vec<SweepRow>, crate::Error> {
    if let SweepSource::External(sets) = &config.source {
        if sets.len() != strides.len() {
            return Err(crate::Error::Config(format!(
                "{} trajectory sets for {} strides",
                sets.len(),
                strides.len()
            )));
        }
    }
    for &s in strides {
        plan_windows(seq.len(), s)?;
    }
    let mut rows = Vec::with_capacity(strides.len());
    for (i, &stride) in strides.iter().enumerate() {
        let t0 = Instant::now();
        let (trajectories, tracker) = match &config.source {
            SweepSource::Builtin { radius } => (
                windowed_shifts(seq, stride, &config.mode, *radius)?,
                TrackerSource::Builtin,
            ),
            SweepSource::External(sets) => (sets[i].clone(), TrackerSource::External),
        };
        let cfg = CompressConfig {
            mode: config.mode.clone(),
            source: ShiftSource::External(trajectories),
        };
        let mut stream = compress_video(seq, &cfg)?;
        stream.tracker = tracker;
        let recon = decompress_video(&stream)?;
        let elapsed = t0.elapsed().as_secs_f64() * 1000.0;

        let compression = compression_percent(&stream).aggregate.compression_pct;
        let loss = data_loss_percent(seq, &recon)?
            .aggregate
            .loss_pct
            .expect("loss computed");
        rows.push(SweepRow {
            stride,
            compression_pct: compression,
            loss_pct: loss,
            ms_per_frame: elapsed / seq.len() as f64,
        });
    }
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{:.4},{:.4},{:.4}",
            r.stride, r.compression_pct, r.loss_pct, r.ms_per_frame
        );
    }
    out
}
