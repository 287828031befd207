//! Redundancy removal by shift.
//!
//! Every frame after the first is stored as a shift plus the pixels that the
//! shift does not explain. In global mode one shift covers the frame: the
//! destination rectangle whose source (moved back by the shift) lies inside
//! the previous frame is redundant, and only the L-shaped strip around it is
//! kept. In grid mode each block carries its own shift and is either copied
//! from the previous reconstruction or stored raw.
//!
//! Payload scan orders are fixed:
//! - global: full-frame row-major, skipping redundant pixels;
//! - grid: non-redundant blocks in row-major block order, each block's
//!   pixels row-major.

use thiserror::Error;

use crate::frame_io::{Frame, FrameSequence};
use crate::tracking::{
    estimate_global_shift_hinted, estimate_grid_shifts, judge_grid_field, GridSpec, Rect, Shift,
    ShiftField, Trajectories, DEFAULT_RADIUS,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodecError {
    #[error("payload holds {actual} bytes, region arithmetic needs {expected}")]
    PayloadLengthMismatch { expected: usize, actual: usize },
    #[error("block {block} copies from outside the reference frame")]
    SourceOutOfBounds { block: usize },
    #[error("inconsistent shift field: {0}")]
    InconsistentField(String),
    #[error("reference is {ref_w}x{ref_h}, frame is {w}x{h}")]
    DimensionMismatch {
        ref_w: usize,
        ref_h: usize,
        w: usize,
        h: usize,
    },
    #[error("compressed frame mode does not match the stream")]
    ModeMismatch,
}

/// Redundant destination rectangle for a global shift; the non-redundant
/// region is its complement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegionPair {
    pub redundant: Rect,
    pub width: usize,
    pub height: usize,
}

impl RegionPair {
    pub fn redundant_area(&self) -> usize {
        self.redundant.area()
    }

    pub fn nonredundant_area(&self) -> usize {
        self.width * self.height - self.redundant.area()
    }

    pub fn is_redundant(&self, col: usize, row: usize) -> bool {
        self.redundant.contains(col, row)
    }
}

pub fn redundant_region(shift: Shift, w: usize, h: usize) -> RegionPair {
    let (wi, hi) = (w as i64, h as i64);
    let (dx, dy) = (shift.dx as i64, shift.dy as i64);
    let redundant = if dx.abs() >= wi || dy.abs() >= hi {
        Rect {
            col_lo: 0,
            row_lo: 0,
            col_hi: 0,
            row_hi: 0,
        }
    } else {
        Rect {
            col_lo: dx.max(0) as usize,
            row_lo: dy.max(0) as usize,
            col_hi: (wi + dx.min(0)) as usize,
            row_hi: (hi + dy.min(0)) as usize,
        }
    };
    RegionPair {
        redundant,
        width: w,
        height: h,
    }
}

/// Closed form for the L-strip area:
/// `min(|dx|,W)*H + min(|dy|,H)*W - min(|dx|,W)*min(|dy|,H)`.
pub fn nonredundant_area(shift: Shift, w: usize, h: usize) -> usize {
    let mx = (shift.dx.unsigned_abs() as usize).min(w);
    let my = (shift.dy.unsigned_abs() as usize).min(h);
    mx * h + my * w - mx * my
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CompressedFrame {
    Global { shift: Shift, payload: Vec<u8> },
    Grid { field: ShiftField, payload: Vec<u8> },
}

impl CompressedFrame {
    pub fn payload(&self) -> &[u8] {
        match self {
            CompressedFrame::Global { payload, .. } | CompressedFrame::Grid { payload, .. } => {
                payload
            }
        }
    }

    /// Payload length implied by the shift metadata for a `w` x `h` frame.
    pub fn expected_payload_len(&self, w: usize, h: usize) -> usize {
        match self {
            CompressedFrame::Global { shift, .. } => 3 * nonredundant_area(*shift, w, h),
            CompressedFrame::Grid { field, .. } => 3 * field.raw_area(),
        }
    }

    fn check_payload(&self, w: usize, h: usize) -> Result<(), CodecError> {
        let expected = self.expected_payload_len(w, h);
        let actual = self.payload().len();
        if expected != actual {
            return Err(CodecError::PayloadLengthMismatch { expected, actual });
        }
        Ok(())
    }
}

pub fn compress_frame_global(cur: &Frame, shift: Shift) -> CompressedFrame {
    let (w, h) = (cur.width(), cur.height());
    let region = redundant_region(shift, w, h);
    let rect = region.redundant;
    let mut payload = Vec::with_capacity(3 * region.nonredundant_area());
    for r in 0..h {
        if rect.is_empty() || !(rect.row_lo..rect.row_hi).contains(&r) {
            payload.extend_from_slice(cur.span(0, r, w));
        } else {
            payload.extend_from_slice(cur.span(0, r, rect.col_lo));
            payload.extend_from_slice(cur.span(rect.col_hi, r, w - rect.col_hi));
        }
    }
    CompressedFrame::Global { shift, payload }
}

fn check_field(field: &ShiftField, w: usize, h: usize) -> Result<(), CodecError> {
    if field.frame_width() != w || field.frame_height() != h {
        return Err(CodecError::InconsistentField(format!(
            "field covers {}x{}, frame is {w}x{h}",
            field.frame_width(),
            field.frame_height()
        )));
    }
    Ok(())
}

pub fn compress_frame_grid(
    prev_recon: &Frame,
    cur: &Frame,
    field: &ShiftField,
) -> Result<CompressedFrame, CodecError> {
    let (w, h) = (cur.width(), cur.height());
    if !prev_recon.same_dimensions(cur) {
        return Err(CodecError::DimensionMismatch {
            ref_w: prev_recon.width(),
            ref_h: prev_recon.height(),
            w,
            h,
        });
    }
    check_field(field, w, h)?;
    let mut payload = Vec::with_capacity(3 * field.raw_area());
    for (i, (&shift, &redundant)) in field.shifts().iter().zip(field.redundant()).enumerate() {
        let rect = field.block_rect(i);
        if redundant {
            if !rect.source_in_bounds(shift, w, h) {
                return Err(CodecError::InconsistentField(format!(
                    "redundant block {i} has an out-of-bounds source"
                )));
            }
        } else {
            for r in rect.row_lo..rect.row_hi {
                payload.extend_from_slice(cur.span(rect.col_lo, r, rect.width()));
            }
        }
    }
    Ok(CompressedFrame::Grid {
        field: field.clone(),
        payload,
    })
}

/// Read access to the reference frame during decoding.
pub trait Reference {
    fn width(&self) -> usize;
    fn height(&self) -> usize;
    /// The bytes of `len` pixels starting at (`col`, `row`).
    fn span(&self, col: usize, row: usize, len: usize) -> &[u8];
}

impl Reference for Frame {
    fn width(&self) -> usize {
        Frame::width(self)
    }

    fn height(&self) -> usize {
        Frame::height(self)
    }

    fn span(&self, col: usize, row: usize, len: usize) -> &[u8] {
        Frame::span(self, col, row, len)
    }
}

/// Rebuilds one frame from its predecessor's reconstruction. Redundant pixels
/// are fetched from `prev_recon` at their position moved back by the shift;
/// everything else comes from the payload.
pub fn decompress_frame<R: Reference + ?Sized>(
    prev_recon: &R,
    cf: &CompressedFrame,
) -> Result<Frame, CodecError> {
    let (w, h) = (prev_recon.width(), prev_recon.height());
    cf.check_payload(w, h)?;
    let mut out = Frame::black(w, h);
    match cf {
        CompressedFrame::Global { shift, payload } => {
            let rect = redundant_region(*shift, w, h).redundant;
            let mut pos = 0;
            let mut take = |n: usize| {
                let s = &payload[pos..pos + 3 * n];
                pos += 3 * n;
                s
            };
            for r in 0..h {
                if rect.is_empty() || !(rect.row_lo..rect.row_hi).contains(&r) {
                    out.span_mut(0, r, w).copy_from_slice(take(w));
                    continue;
                }
                out.span_mut(0, r, rect.col_lo).copy_from_slice(take(rect.col_lo));
                let sr = (r as i64 - shift.dy as i64) as usize;
                let sc = (rect.col_lo as i64 - shift.dx as i64) as usize;
                out.span_mut(rect.col_lo, r, rect.width())
                    .copy_from_slice(prev_recon.span(sc, sr, rect.width()));
                out.span_mut(rect.col_hi, r, w - rect.col_hi)
                    .copy_from_slice(take(w - rect.col_hi));
            }
        }
        CompressedFrame::Grid { field, payload } => {
            check_field(field, w, h)?;
            let mut pos = 0;
            for (i, (&shift, &redundant)) in field.shifts().iter().zip(field.redundant()).enumerate() {
                let rect = field.block_rect(i);
                let bw = rect.width();
                if redundant {
                    if !rect.source_in_bounds(shift, w, h) {
                        return Err(CodecError::SourceOutOfBounds { block: i });
                    }
                    let sc = (rect.col_lo as i64 - shift.dx as i64) as usize;
                    for r in rect.row_lo..rect.row_hi {
                        let sr = (r as i64 - shift.dy as i64) as usize;
                        out.span_mut(rect.col_lo, r, bw)
                            .copy_from_slice(prev_recon.span(sc, sr, bw));
                    }
                } else {
                    for r in rect.row_lo..rect.row_hi {
                        out.span_mut(rect.col_lo, r, bw)
                            .copy_from_slice(&payload[pos..pos + 3 * bw]);
                        pos += 3 * bw;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Debug raster: payload pixels in place, redundant pixels black.
pub fn export_masked_frame(cf: &CompressedFrame, w: usize, h: usize) -> Result<Frame, CodecError> {
    // Decoding against an all-black reference leaves exactly the masked view.
    decompress_frame(&Frame::black(w, h), cf)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamMode {
    Global,
    Grid(GridSpec),
}

/// Where the shifts in a stream came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrackerSource {
    #[default]
    Builtin,
    External,
}

/// A compressed sequence: the first frame raw, then one record per
/// following frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct R2SStream {
    pub width: usize,
    pub height: usize,
    pub mode: StreamMode,
    pub tracker: TrackerSource,
    pub first_frame: Frame,
    pub frames: Vec<CompressedFrame>,
}

impl R2SStream {
    pub fn frame_count(&self) -> usize {
        self.frames.len() + 1
    }

    /// Checks dimensions, per-frame mode and payload arithmetic.
    pub fn validate(&self) -> Result<(), CodecError> {
        let (w, h) = (self.width, self.height);
        if self.first_frame.width() != w || self.first_frame.height() != h {
            return Err(CodecError::DimensionMismatch {
                ref_w: self.first_frame.width(),
                ref_h: self.first_frame.height(),
                w,
                h,
            });
        }
        for cf in &self.frames {
            match (self.mode, cf) {
                (StreamMode::Global, CompressedFrame::Global { .. }) => {}
                (StreamMode::Grid(grid), CompressedFrame::Grid { field, .. }) => {
                    if field.grid() != grid {
                        return Err(CodecError::InconsistentField("block size differs from stream".into()));
                    }
                    check_field(field, w, h)?;
                }
                _ => return Err(CodecError::ModeMismatch),
            }
            cf.check_payload(w, h)?;
        }
        Ok(())
    }

    /// Frame-by-frame decoder that keeps only the latest reconstruction.
    pub fn decoder(&self) -> StreamDecoder<'_> {
        StreamDecoder {
            stream: self,
            prev: None,
            next: 0,
        }
    }
}

pub struct StreamDecoder<'a> {
    stream: &'a R2SStream,
    prev: Option<Frame>,
    next: usize,
}

impl Iterator for StreamDecoder<'_> {
    type Item = Result<Frame, CodecError>;

    fn next(&mut self) -> Option<Self::Item> {
        let frame = if self.next == 0 {
            self.stream.first_frame.clone()
        } else {
            let cf = self.stream.frames.get(self.next - 1)?;
            let prev = self.prev.as_ref().expect("previous frame decoded");
            match decompress_frame(prev, cf) {
                Ok(f) => f,
                Err(e) => {
                    self.next = usize::MAX;
                    return Some(Err(e));
                }
            }
        };
        self.next += 1;
        self.prev = Some(frame.clone());
        Some(Ok(frame))
    }
}

pub fn decompress_video(stream: &R2SStream) -> Result<FrameSequence, CodecError> {
    let frames = stream.decoder().collect::<Result<Vec<_>, _>>()?;
    Ok(FrameSequence::new(frames, None).expect("decoded frames share the stream dimensions"))
}

#[derive(Debug, Clone, PartialEq)]
pub enum ShiftSource {
    /// Exhaustive block matching with the given search radius.
    Builtin { radius: u32 },
    /// Shifts from an external tracker, indexed by frame.
    External(Trajectories),
}

impl Default for ShiftSource {
    fn default() -> Self {
        ShiftSource::Builtin {
            radius: DEFAULT_RADIUS,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModeConfig {
    Global,
    Grid { grid: GridSpec, tau: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompressConfig {
    pub mode: ModeConfig,
    pub source: ShiftSource,
}

impl CompressConfig {
    pub fn global(source: ShiftSource) -> Self {
        CompressConfig {
            mode: ModeConfig::Global,
            source,
        }
    }

    pub fn grid(grid: GridSpec, tau: f64, source: ShiftSource) -> Self {
        CompressConfig {
            mode: ModeConfig::Grid { grid, tau },
            source,
        }
    }
}

fn check_trajectories(t: &Trajectories, n: usize, points: usize) -> Result<(), crate::Error> {
    if t.n_frames() != n || t.points() != points {
        return Err(crate::Error::Config(format!(
            "trajectories cover {} frames x {} points, need {n} x {points}",
            t.n_frames(),
            t.points()
        )));
    }
    Ok(())
}

/// Compresses a sequence. Global mode takes shifts from the original frames
/// (open loop); grid mode judges every block against the running
/// reconstruction (closed loop), so `tau = 0` is lossless.
pub fn compress_video(seq: &FrameSequence, config: &CompressConfig) -> Result<R2SStream, crate::Error> {
    let frames = seq.frames();
    let (w, h) = (seq.width(), seq.height());
    let n = frames.len();
    let tracker = match config.source {
        ShiftSource::Builtin { .. } => TrackerSource::Builtin,
        ShiftSource::External(_) => TrackerSource::External,
    };
    let mut out = Vec::with_capacity(n - 1);

    let mode = match &config.mode {
        ModeConfig::Global => {
            if let ShiftSource::External(t) = &config.source {
                check_trajectories(t, n, 1)?;
            }
            let mut hint = None;
            for f in 1..n {
                let shift = match &config.source {
                    ShiftSource::Builtin { radius } => {
                        let radius = (*radius).min(w.min(h) as u32 - 1);
                        let s = estimate_global_shift_hinted(&frames[f - 1], &frames[f], radius, hint)?;
                        hint = Some(s);
                        s
                    }
                    ShiftSource::External(t) => t.global(f),
                };
                out.push(compress_frame_global(&frames[f], shift));
            }
            StreamMode::Global
        }
        ModeConfig::Grid { grid, tau } => {
            if !(*tau >= 0.0) {
                return Err(crate::Error::Config(format!("tau must be non-negative, got {tau}")));
            }
            if let ShiftSource::External(t) = &config.source {
                check_trajectories(t, n, grid.block_count(w, h))?;
            }
            let mut recon = frames[0].clone();
            for f in 1..n {
                let field = match &config.source {
                    ShiftSource::Builtin { radius } => {
                        estimate_grid_shifts(&recon, &frames[f], *grid, *radius, *tau)?
                    }
                    ShiftSource::External(t) => {
                        judge_grid_field(&recon, &frames[f], *grid, t.frame(f), *tau)?
                    }
                };
                let cf = compress_frame_grid(&recon, &frames[f], &field)?;
                recon = if *tau == 0.0 {
                    // exact matches only: the reconstruction is the input
                    frames[f].clone()
                } else {
                    decompress_frame(&recon, &cf)?
                };
                out.push(cf);
            }
            StreamMode::Grid(*grid)
        }
    };

    Ok(R2SStream {
        width: w,
        height: h,
        mode,
        tracker,
        first_frame: frames[0].clone(),
        frames: out,
    })
}
