//! Inter-frame shift data: the built-in block-matching estimators (one global
//! shift per frame, or one shift per grid block), ingestion of external
//! tracker output, and stride window planning.
//!
//! Shift convention: content at (c, r) in frame f-1 appears at (c+dx, r+dy)
//! in frame f.

use std::io::Read;
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use rayon::prelude::*;
use thiserror::Error;

use crate::frame_io::Frame;

pub const DEFAULT_BLOCK_SIZE: usize = 16;
pub const DEFAULT_RADIUS: u32 = 16;
/// Largest representable shift component (grid records store i16).
pub const MAX_SHIFT_COMPONENT: i32 = i16::MAX as i32;

const TRAJECTORY_HEADER: [&str; 4] = ["frame", "point", "dx", "dy"];

#[derive(Debug, Error)]
pub enum TrackingError {
    #[error("frame dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("search radius {radius} must be below min(width, height) = {limit}")]
    InvalidRadius { radius: u32, limit: usize },
    #[error("grid blocks must be at least 1x1, got {0}x{1}")]
    InvalidGrid(usize, usize),
    #[error("stride {0} must be even and at least 2")]
    InvalidStride(usize),
    #[error("bad trajectory CSV: {0}")]
    BadCsv(String),
    #[error("trajectory line {line}: point {point} out of range (grid has {points} points)")]
    PointIndexOutOfRange {
        line: u64,
        point: usize,
        points: usize,
    },
    #[error("trajectory line {line}: frame {frame} out of range 1..{n_frames}")]
    FrameIndexOutOfRange {
        line: u64,
        frame: usize,
        n_frames: usize,
    },
    #[error("trajectory line {line}: shift ({dx}, {dy}) exceeds +/-{MAX_SHIFT_COMPONENT}")]
    ShiftOutOfRange { line: u64, dx: f64, dy: f64 },
    #[error("cannot read trajectory file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Shift {
    pub dx: i32,
    pub dy: i32,
}

impl Shift {
    pub const ZERO: Shift = Shift { dx: 0, dy: 0 };

    pub const fn new(dx: i32, dy: i32) -> Self {
        Shift { dx, dy }
    }

    pub fn is_representable(self) -> bool {
        self.dx.abs() <= MAX_SHIFT_COMPONENT && self.dy.abs() <= MAX_SHIFT_COMPONENT
    }

    fn l1(self) -> i32 {
        self.dx.abs() + self.dy.abs()
    }
}

/// Half-open pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub col_lo: usize,
    pub row_lo: usize,
    pub col_hi: usize,
    pub row_hi: usize,
}

impl Rect {
    pub fn width(&self) -> usize {
        self.col_hi.saturating_sub(self.col_lo)
    }

    pub fn height(&self) -> usize {
        self.row_hi.saturating_sub(self.row_lo)
    }

    pub fn area(&self) -> usize {
        self.width() * self.height()
    }

    pub fn is_empty(&self) -> bool {
        self.area() == 0
    }

    pub fn contains(&self, col: usize, row: usize) -> bool {
        (self.col_lo..self.col_hi).contains(&col) && (self.row_lo..self.row_hi).contains(&row)
    }

    /// True when this rect moved by `-shift` stays inside a `w` x `h` frame.
    pub fn source_in_bounds(&self, shift: Shift, w: usize, h: usize) -> bool {
        let (dx, dy) = (shift.dx as i64, shift.dy as i64);
        self.col_lo as i64 - dx >= 0
            && self.col_hi as i64 - dx <= w as i64
            && self.row_lo as i64 - dy >= 0
            && self.row_hi as i64 - dy <= h as i64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    pub block_w: usize,
    pub block_h: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            block_w: DEFAULT_BLOCK_SIZE,
            block_h: DEFAULT_BLOCK_SIZE,
        }
    }
}

impl GridSpec {
    pub fn new(block_w: usize, block_h: usize) -> Result<Self, TrackingError> {
        if block_w == 0 || block_h == 0 {
            return Err(TrackingError::InvalidGrid(block_w, block_h));
        }
        Ok(GridSpec { block_w, block_h })
    }

    pub fn blocks_wide(&self, w: usize) -> usize {
        w.div_ceil(self.block_w)
    }

    pub fn blocks_high(&self, h: usize) -> usize {
        h.div_ceil(self.block_h)
    }

    pub fn block_count(&self, w: usize, h: usize) -> usize {
        self.blocks_wide(w) * self.blocks_high(h)
    }

    /// Rect of row-major block `index`; edge blocks are clipped to the frame.
    pub fn block_rect(&self, index: usize, w: usize, h: usize) -> Rect {
        let bw = self.blocks_wide(w);
        let (bx, by) = (index % bw, index / bw);
        let col_lo = bx * self.block_w;
        let row_lo = by * self.block_h;
        Rect {
            col_lo,
            row_lo,
            col_hi: (col_lo + self.block_w).min(w),
            row_hi: (row_lo + self.block_h).min(h),
        }
    }

    pub fn block_rects(&self, w: usize, h: usize) -> impl Iterator<Item = Rect> + '_ {
        (0..self.block_count(w, h)).map(move |i| self.block_rect(i, w, h))
    }
}

/// Per-block shifts and redundancy flags over a `frame_w` x `frame_h` frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShiftField {
    grid: GridSpec,
    frame_w: usize,
    frame_h: usize,
    shifts: Vec<Shift>,
    redundant: Vec<bool>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FieldError {
    #[error("field has {shifts} shifts and {flags} flags, grid needs {blocks}")]
    WrongLength {
        blocks: usize,
        shifts: usize,
        flags: usize,
    },
    #[error("redundant block {0} has an out-of-bounds source")]
    SourceOutOfBounds(usize),
}

impl ShiftField {
    pub fn new(
        grid: GridSpec,
        frame_w: usize,
        frame_h: usize,
        shifts: Vec<Shift>,
        redundant: Vec<bool>,
    ) -> Result<Self, FieldError> {
        let blocks = grid.block_count(frame_w, frame_h);
        if shifts.len() != blocks || redundant.len() != blocks {
            return Err(FieldError::WrongLength {
                blocks,
                shifts: shifts.len(),
                flags: redundant.len(),
            });
        }
        for (i, (s, &r)) in shifts.iter().zip(&redundant).enumerate() {
            if r && !grid.block_rect(i, frame_w, frame_h).source_in_bounds(*s, frame_w, frame_h) {
                return Err(FieldError::SourceOutOfBounds(i));
            }
        }
        Ok(ShiftField {
            grid,
            frame_w,
            frame_h,
            shifts,
            redundant,
        })
    }

    /// Builds a field without the in-bounds check. Decoders must still
    /// validate each redundant block before copying.
    pub fn new_unchecked(
        grid: GridSpec,
        frame_w: usize,
        frame_h: usize,
        shifts: Vec<Shift>,
        redundant: Vec<bool>,
    ) -> Result<Self, FieldError> {
        let blocks = grid.block_count(frame_w, frame_h);
        if shifts.len() != blocks || redundant.len() != blocks {
            return Err(FieldError::WrongLength {
                blocks,
                shifts: shifts.len(),
                flags: redundant.len(),
            });
        }
        Ok(ShiftField {
            grid,
            frame_w,
            frame_h,
            shifts,
            redundant,
        })
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn frame_width(&self) -> usize {
        self.frame_w
    }

    pub fn frame_height(&self) -> usize {
        self.frame_h
    }

    pub fn shifts(&self) -> &[Shift] {
        &self.shifts
    }

    pub fn redundant(&self) -> &[bool] {
        &self.redundant
    }

    pub fn len(&self) -> usize {
        self.shifts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shifts.is_empty()
    }

    pub fn block_rect(&self, index: usize) -> Rect {
        self.grid.block_rect(index, self.frame_w, self.frame_h)
    }

    /// Pixel area of all non-redundant blocks.
    pub fn raw_area(&self) -> usize {
        self.redundant
            .iter()
            .enumerate()
            .filter(|(_, r)| !**r)
            .map(|(i, _)| self.block_rect(i).area())
            .sum()
    }
}

/// Candidate shifts in `[-radius, radius]^2`, ordered by tie-break priority:
/// smallest |dx|+|dy|, then smallest dy, then smallest dx.
pub fn search_order(radius: u32) -> Vec<Shift> {
    let r = radius as i32;
    let mut out: Vec<Shift> = (-r..=r)
        .flat_map(|dy| (-r..=r).map(move |dx| Shift::new(dx, dy)))
        .collect();
    out.sort_by_key(|s| (s.l1(), s.dy, s.dx));
    out
}

fn cached_search_order(radius: u32) -> std::borrow::Cow<'static, [Shift]> {
    static SMALL: OnceLock<Vec<Vec<Shift>>> = OnceLock::new();
    const CACHED: u32 = 32;
    if radius <= CACHED {
        let table = SMALL.get_or_init(|| (0..=CACHED).map(search_order).collect());
        std::borrow::Cow::Borrowed(&table[radius as usize])
    } else {
        std::borrow::Cow::Owned(search_order(radius))
    }
}

#[inline]
fn row_sad(a: &[u8], b: &[u8]) -> u64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| x.abs_diff(y) as u32)
        .sum::<u32>() as u64
}

/// Running argmin over candidates. Scores are `sad / count` compared exactly
/// by cross-multiplication; ties go to the lower priority index.
#[derive(Clone, Copy)]
struct Best {
    sad: u64,
    count: u64,
    prio: usize,
}

impl Best {
    fn beats(&self, sad: u64, count: u64, prio: usize) -> bool {
        let lhs = sad as u128 * self.count as u128;
        let rhs = self.sad as u128 * count as u128;
        lhs < rhs || (lhs == rhs && prio < self.prio)
    }

    /// Partial sums only grow, so once this holds the candidate cannot win.
    fn hopeless(&self, partial: u64, count: u64, prio: usize) -> bool {
        let lhs = partial as u128 * self.count as u128;
        let rhs = self.sad as u128 * count as u128;
        lhs > rhs || (lhs == rhs && prio > self.prio)
    }
}

fn check_same_dims(a: &Frame, b: &Frame) -> Result<(), TrackingError> {
    if a.same_dimensions(b) {
        Ok(())
    } else {
        Err(TrackingError::DimensionMismatch(
            a.width(),
            a.height(),
            b.width(),
            b.height(),
        ))
    }
}

/// Overlap SAD of `cur` against `prev` displaced by `shift`, or `None` once
/// `best` can no longer be beaten. Returns `(sad, overlap pixel count)`.
fn global_sad(prev: &Frame, cur: &Frame, shift: Shift, best: Option<&Best>, prio: usize) -> Option<(u64, u64)> {
    let (w, h) = (cur.width() as i64, cur.height() as i64);
    let (dx, dy) = (shift.dx as i64, shift.dy as i64);
    let c0 = dx.max(0);
    let c1 = w + dx.min(0);
    let r0 = dy.max(0);
    let r1 = h + dy.min(0);
    if c1 <= c0 || r1 <= r0 {
        return None;
    }
    let cols = (c1 - c0) as usize;
    let count = (cols * (r1 - r0) as usize) as u64;
    let mut sad = 0u64;
    for r in r0..r1 {
        let a = cur.span(c0 as usize, r as usize, cols);
        let b = prev.span((c0 - dx) as usize, (r - dy) as usize, cols);
        sad += row_sad(a, b);
        if best.is_some_and(|b| b.hopeless(sad, count, prio)) {
            return None;
        }
    }
    Some((sad, count))
}

/// Exhaustive search for the global shift minimizing per-pixel SAD over the
/// overlap of `cur` and shifted `prev`.
pub fn estimate_global_shift(prev: &Frame, cur: &Frame, radius: u32) -> Result<Shift, TrackingError> {
    estimate_global_shift_hinted(prev, cur, radius, None)
}

/// Same result as [`estimate_global_shift`]; `hint` is scored first so that
/// the remaining candidates can bail out early.
pub fn estimate_global_shift_hinted(
    prev: &Frame,
    cur: &Frame,
    radius: u32,
    hint: Option<Shift>,
) -> Result<Shift, TrackingError> {
    check_same_dims(prev, cur)?;
    let limit = cur.width().min(cur.height());
    if radius as usize >= limit || radius as i32 > MAX_SHIFT_COMPONENT {
        return Err(TrackingError::InvalidRadius { radius, limit });
    }
    let order = cached_search_order(radius);
    let mut best: Option<Best> = None;

    let r = radius as i32;
    if let Some(h) = hint.filter(|h| h.dx.abs() <= r && h.dy.abs() <= r) {
        let prio = order.iter().position(|s| *s == h).expect("hint inside window");
        if let Some((sad, count)) = global_sad(prev, cur, h, None, prio) {
            best = Some(Best { sad, count, prio });
        }
    }
    for (prio, &cand) in order.iter().enumerate() {
        if let Some(b) = &best {
            if b.sad == 0 && prio >= b.prio {
                break;
            }
            if prio == b.prio {
                continue;
            }
        }
        if let Some((sad, count)) = global_sad(prev, cur, cand, best.as_ref(), prio) {
            if best.is_none_or(|b| b.beats(sad, count, prio)) {
                best = Some(Best { sad, count, prio });
            }
        }
    }
    Ok(best.map_or(Shift::ZERO, |b| order[b.prio]))
}

/// Block SAD against the source rect offset by `-shift`; `None` once `best`
/// is out of reach. Caller guarantees the source is in bounds.
fn block_sad(prev: &Frame, cur: &Frame, rect: Rect, shift: Shift, best: Option<&Best>, prio: usize) -> Option<u64> {
    let cols = rect.width();
    let count = rect.area() as u64;
    let sc = (rect.col_lo as i64 - shift.dx as i64) as usize;
    let mut sad = 0u64;
    for r in rect.row_lo..rect.row_hi {
        let sr = (r as i64 - shift.dy as i64) as usize;
        sad += row_sad(cur.span(rect.col_lo, r, cols), prev.span(sc, sr, cols));
        if best.is_some_and(|b| b.hopeless(sad, count, prio)) {
            return None;
        }
    }
    Some(sad)
}

fn search_block(
    prev: &Frame,
    cur: &Frame,
    rect: Rect,
    order: &[Shift],
    hint: Option<Shift>,
) -> (Shift, u64) {
    let (w, h) = (cur.width(), cur.height());
    let count = rect.area() as u64;
    let mut best: Option<Best> = None;
    if let Some(hs) = hint.filter(|s| rect.source_in_bounds(*s, w, h)) {
        if let Some(prio) = order.iter().position(|s| *s == hs) {
            let sad = block_sad(prev, cur, rect, hs, None, prio).expect("unbounded search");
            best = Some(Best { sad, count, prio });
        }
    }
    for (prio, &cand) in order.iter().enumerate() {
        if let Some(b) = &best {
            if b.sad == 0 && prio >= b.prio {
                break;
            }
            if prio == b.prio {
                continue;
            }
        }
        if !rect.source_in_bounds(cand, w, h) {
            continue;
        }
        if let Some(sad) = block_sad(prev, cur, rect, cand, best.as_ref(), prio) {
            if best.is_none_or(|b| b.beats(sad, count, prio)) {
                best = Some(Best { sad, count, prio });
            }
        }
    }
    // (0, 0) is always in bounds, so some candidate was scored
    let b = best.expect("zero shift is always a candidate");
    (order[b.prio], b.sad)
}

fn within_tau(sad: u64, area: usize, tau: f64) -> bool {
    sad as f64 <= tau * (3 * area) as f64
}

/// Per-block search of `cur` against `prev_recon`. Only shifts whose source
/// rect lies fully inside the frame are candidates. A block is redundant when
/// its best match has mean absolute channel difference `<= tau`; other blocks
/// record shift (0, 0).
pub fn estimate_grid_shifts(
    prev_recon: &Frame,
    cur: &Frame,
    grid: GridSpec,
    radius: u32,
    tau: f64,
) -> Result<ShiftField, TrackingError> {
    check_same_dims(prev_recon, cur)?;
    if radius as i32 > MAX_SHIFT_COMPONENT {
        return Err(TrackingError::InvalidRadius {
            radius,
            limit: MAX_SHIFT_COMPONENT as usize,
        });
    }
    let (w, h) = (cur.width(), cur.height());
    let order = cached_search_order(radius);
    let bw = grid.blocks_wide(w);
    let bh = grid.blocks_high(h);

    // Rows run in parallel; within a row the left neighbour seeds the search.
    let rows: Vec<Vec<(Shift, bool)>> = (0..bh)
        .into_par_iter()
        .map(|by| {
            let mut hint = None;
            (0..bw)
                .map(|bx| {
                    let rect = grid.block_rect(by * bw + bx, w, h);
                    let (shift, sad) = search_block(prev_recon, cur, rect, &order, hint);
                    hint = Some(shift);
                    if within_tau(sad, rect.area(), tau) {
                        (shift, true)
                    } else {
                        (Shift::ZERO, false)
                    }
                })
                .collect()
        })
        .collect();

    let (shifts, redundant) = rows.into_iter().flatten().unzip();
    Ok(ShiftField::new(grid, w, h, shifts, redundant).expect("search keeps sources in bounds"))
}

/// Applies externally supplied per-block shifts, deciding redundancy with
/// the same in-bounds and `tau` test as [`estimate_grid_shifts`].
pub fn judge_grid_field(
    prev_recon: &Frame,
    cur: &Frame,
    grid: GridSpec,
    shifts: &[Shift],
    tau: f64,
) -> Result<ShiftField, TrackingError> {
    check_same_dims(prev_recon, cur)?;
    let (w, h) = (cur.width(), cur.height());
    let blocks = grid.block_count(w, h);
    if shifts.len() != blocks {
        return Err(TrackingError::BadCsv(format!(
            "expected {blocks} block shifts, got {}",
            shifts.len()
        )));
    }
    let (shifts, redundant) = shifts
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let rect = grid.block_rect(i, w, h);
            let ok = rect.source_in_bounds(s, w, h)
                && block_sad(prev_recon, cur, rect, s, None, 0)
                    .is_some_and(|sad| within_tau(sad, rect.area(), tau));
            if ok {
                (s, true)
            } else {
                (Shift::ZERO, false)
            }
        })
        .unzip();
    Ok(ShiftField::new(grid, w, h, shifts, redundant).expect("sources checked"))
}

/// How trajectory points map onto a frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointLayout {
    /// One point (index 0) per frame.
    Global,
    /// One point per grid block, row-major.
    Grid { blocks: usize },
}

impl PointLayout {
    pub fn points(&self) -> usize {
        match *self {
            PointLayout::Global => 1,
            PointLayout::Grid { blocks } => blocks,
        }
    }
}

/// Integer shifts per frame and point. Frame 0 has no predecessor and is
/// always all zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectories {
    points: usize,
    shifts: Vec<Vec<Shift>>,
}

impl Trajectories {
    pub fn zeros(n_frames: usize, points: usize) -> Self {
        Trajectories {
            points,
            shifts: vec![vec![Shift::ZERO; points]; n_frames],
        }
    }

    /// One global shift per frame; entry 0 is ignored.
    pub fn from_global(shifts: Vec<Shift>) -> Self {
        Self::from_frames(1, shifts.into_iter().map(|s| vec![s]).collect())
    }

    /// # Panics
    ///
    /// Panics if any frame has a shift count other than `points`.
    pub fn from_frames(points: usize, mut shifts: Vec<Vec<Shift>>) -> Self {
        assert!(shifts.iter().all(|f| f.len() == points));
        if let Some(first) = shifts.first_mut() {
            first.fill(Shift::ZERO);
        }
        Trajectories { points, shifts }
    }

    pub fn n_frames(&self) -> usize {
        self.shifts.len()
    }

    pub fn points(&self) -> usize {
        self.points
    }

    /// Shifts for `frame` (one per point).
    pub fn frame(&self, frame: usize) -> &[Shift] {
        &self.shifts[frame]
    }

    /// Point 0 of `frame`.
    pub fn global(&self, frame: usize) -> Shift {
        self.shifts[frame][0]
    }
}

fn round_component(v: f64) -> Option<i32> {
    // f64::round rounds half away from zero
    let r = v.round();
    (r.is_finite() && r.abs() <= MAX_SHIFT_COMPONENT as f64).then_some(r as i32)
}

/// Parses `frame,point,dx,dy` rows. Missing entries stay (0, 0).
pub fn parse_trajectories<R: Read>(
    reader: R,
    n_frames: usize,
    layout: PointLayout,
) -> Result<Trajectories, TrackingError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| TrackingError::BadCsv(e.to_string()))?;
    if header.iter().ne(TRAJECTORY_HEADER) {
        return Err(TrackingError::BadCsv(format!(
            "header must be \"frame,point,dx,dy\", got {:?}",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let points = layout.points();
    let mut out = Trajectories::zeros(n_frames, points);
    let mut seen = vec![vec![false; points]; n_frames];
    for record in rdr.records() {
        let record = record.map_err(|e| TrackingError::BadCsv(e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(i).unwrap_or("");
        let bad = |what: &str| TrackingError::BadCsv(format!("line {line}: bad {what} {:?}", record.iter().collect::<Vec<_>>()));
        let frame: usize = field(0).parse().map_err(|_| bad("frame"))?;
        let point: usize = field(1).parse().map_err(|_| bad("point"))?;
        let dx: f64 = field(2).parse().map_err(|_| bad("dx"))?;
        let dy: f64 = field(3).parse().map_err(|_| bad("dy"))?;
        if frame == 0 || frame >= n_frames {
            return Err(TrackingError::FrameIndexOutOfRange {
                line,
                frame,
                n_frames,
            });
        }
        if point >= points {
            return Err(TrackingError::PointIndexOutOfRange {
                line,
                point,
                points,
            });
        }
        let (Some(rx), Some(ry)) = (round_component(dx), round_component(dy)) else {
            return Err(TrackingError::ShiftOutOfRange { line, dx, dy });
        };
        if std::mem::replace(&mut seen[frame][point], true) {
            return Err(TrackingError::BadCsv(format!(
                "line {line}: duplicate entry for frame {frame} point {point}"
            )));
        }
        out.shifts[frame][point] = Shift::new(rx, ry);
    }
    Ok(out)
}

pub fn load_trajectories(
    path: &Path,
    n_frames: usize,
    layout: PointLayout,
) -> Result<Trajectories, TrackingError> {
    let file = std::fs::File::open(path).map_err(|source| TrackingError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_trajectories(std::io::BufReader::new(file), n_frames, layout)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub start: usize,
    pub len: usize,
}

impl Window {
    pub fn range(&self) -> Range<usize> {
        self.start..self.start + self.len
    }
}

/// Overlapping stride windows: window `g` starts at `g * stride / 2` and
/// spans up to `stride` frames.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowPlan {
    pub stride: usize,
    pub windows: Vec<Window>,
    /// Index of the last window (windows run for g = 0..=max_iter).
    pub max_iter: usize,
    /// Set when the sequence is shorter than half a stride and the plan fell
    /// back to one window over everything.
    pub degenerate: bool,
}

impl WindowPlan {
    /// Frames whose shifts window `g` supplies: its first `stride / 2`
    /// frames, or all of them for the final window.
    pub fn supplied(&self, g: usize) -> Range<usize> {
        let w = self.windows[g];
        if g + 1 == self.windows.len() {
            w.range()
        } else {
            w.start..w.start + (self.stride / 2).min(w.len)
        }
    }
}

pub fn plan_windows(n_frames: usize, stride: usize) -> Result<WindowPlan, TrackingError> {
    if stride < 2 || stride % 2 != 0 {
        return Err(TrackingError::InvalidStride(stride));
    }
    if n_frames == 0 {
        return Err(TrackingError::BadCsv("cannot plan windows for zero frames".into()));
    }
    let hop = stride / 2;
    let m = (n_frames / hop) as i64 - 1;
    if m < 0 {
        return Ok(WindowPlan {
            stride,
            windows: vec![Window {
                start: 0,
                len: n_frames,
            }],
            max_iter: 0,
            degenerate: true,
        });
    }
    let windows = (0..=m as usize)
        .map(|g| {
            let start = g * hop;
            Window {
                start,
                len: stride.min(n_frames - start),
            }
        })
        .collect();
    Ok(WindowPlan {
        stride,
        windows,
        max_iter: m as usize,
        degenerate: false,
    })
}
