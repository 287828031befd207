//! Frame rasters and their on-disk interchange: binary PPM (P6, maxval 255)
//! files listed in a line-oriented manifest.
//!
//! Manifest layout:
//!
//! ```text
//! R2S-MANIFEST v1
//! fps 30            (optional)
//! frame_000000.ppm
//! frame_000001.ppm
//! ```
//!
//! Paths are relative to the manifest's directory.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

pub const MANIFEST_MAGIC: &str = "R2S-MANIFEST v1";
pub const MANIFEST_FILE_NAME: &str = "manifest";

#[derive(Debug, Error)]
pub enum FrameIoError {
    #[error("malformed PPM header: {0}")]
    MalformedHeader(String),
    #[error("truncated PPM raster: expected {expected} bytes, got {actual}")]
    TruncatedPayload { expected: usize, actual: usize },
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
    #[error("bad manifest {path}: {reason}")]
    BadManifest { path: PathBuf, reason: String },
    #[error("missing frame file {0}")]
    MissingFrameFile(PathBuf),
    #[error("frame {index} is {actual_w}x{actual_h}, expected {expected_w}x{expected_h}")]
    DimensionMismatch {
        index: usize,
        expected_w: usize,
        expected_h: usize,
        actual_w: usize,
        actual_h: usize,
    },
    #[error("failed to decode {path}: {source}")]
    FrameFile {
        path: PathBuf,
        #[source]
        source: Box<FrameIoError>,
    },
    #[error("I/O failure on {path}: {source}")]
    IoFailure {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// A `width` x `height` RGB8 raster, row-major, three bytes per pixel.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Frame {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl std::fmt::Debug for Frame {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Frame")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}

impl Frame {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, FrameIoError> {
        if width == 0 || height == 0 {
            return Err(FrameIoError::InvalidFrame(format!(
                "dimensions must be positive, got {width}x{height}"
            )));
        }
        let expected = width
            .checked_mul(height)
            .and_then(|n| n.checked_mul(3))
            .ok_or_else(|| FrameIoError::InvalidFrame("dimensions overflow".into()))?;
        if pixels.len() != expected {
            return Err(FrameIoError::InvalidFrame(format!(
                "{width}x{height} frame needs {expected} bytes, got {}",
                pixels.len()
            )));
        }
        Ok(Frame {
            width,
            height,
            pixels,
        })
    }

    /// All-black frame.
    ///
    /// # Panics
    ///
    /// Panics if either dimension is zero.
    pub fn black(width: usize, height: usize) -> Self {
        assert!(width > 0 && height > 0, "frame dimensions must be positive");
        Frame {
            width,
            height,
            pixels: vec![0; width * height * 3],
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    /// Bytes in one row (`3 * width`).
    #[inline]
    pub fn stride(&self) -> usize {
        self.width * 3
    }

    #[inline]
    pub fn pixel(&self, col: usize, row: usize) -> [u8; 3] {
        let i = (row * self.width + col) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    #[inline]
    pub fn set_pixel(&mut self, col: usize, row: usize, rgb: [u8; 3]) {
        let i = (row * self.width + col) * 3;
        self.pixels[i..i + 3].copy_from_slice(&rgb);
    }

    /// The bytes of `len` pixels starting at (`col`, `row`).
    #[inline]
    pub fn span(&self, col: usize, row: usize, len: usize) -> &[u8] {
        let i = (row * self.width + col) * 3;
        &self.pixels[i..i + len * 3]
    }

    #[inline]
    pub fn span_mut(&mut self, col: usize, row: usize, len: usize) -> &mut [u8] {
        let i = (row * self.width + col) * 3;
        &mut self.pixels[i..i + len * 3]
    }

    pub fn same_dimensions(&self, other: &Frame) -> bool {
        self.width == other.width && self.height == other.height
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameSequence {
    frames: Vec<Frame>,
    fps: Option<u32>,
}

impl FrameSequence {
    pub fn new(frames: Vec<Frame>, fps: Option<u32>) -> Result<Self, FrameIoError> {
        let first = frames
            .first()
            .ok_or_else(|| FrameIoError::InvalidFrame("sequence has no frames".into()))?;
        if let Some((index, f)) = frames
            .iter()
            .enumerate()
            .find(|(_, f)| !f.same_dimensions(first))
        {
            return Err(FrameIoError::DimensionMismatch {
                index,
                expected_w: first.width,
                expected_h: first.height,
                actual_w: f.width,
                actual_h: f.height,
            });
        }
        if fps == Some(0) {
            return Err(FrameIoError::InvalidFrame("fps must be positive".into()));
        }
        Ok(FrameSequence { frames, fps })
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<Frame> {
        self.frames
    }

    pub fn fps(&self) -> Option<u32> {
        self.fps
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    /// Always false; a sequence holds at least one frame.
    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn width(&self) -> usize {
        self.frames[0].width
    }

    pub fn height(&self) -> usize {
        self.frames[0].height
    }
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderCursor<'a> {
    /// Skips whitespace and `#` comments, then reads one token.
    fn token(&mut self) -> Result<&'a [u8], FrameIoError> {
        loop {
            match self.bytes.get(self.pos) {
                Some(b) if b.is_ascii_whitespace() => self.pos += 1,
                Some(b'#') => {
                    while let Some(&b) = self.bytes.get(self.pos) {
                        self.pos += 1;
                        if b == b'\n' || b == b'\r' {
                            break;
                        }
                    }
                }
                Some(_) => break,
                None => return Err(FrameIoError::MalformedHeader("unexpected end of header".into())),
            }
        }
        let start = self.pos;
        while self
            .bytes
            .get(self.pos)
            .is_some_and(|b| !b.is_ascii_whitespace() && *b != b'#')
        {
            self.pos += 1;
        }
        Ok(&self.bytes[start..self.pos])
    }

    fn number(&mut self, what: &str) -> Result<usize, FrameIoError> {
        let tok = self.token()?;
        std::str::from_utf8(tok)
            .ok()
            .filter(|s| s.bytes().all(|b| b.is_ascii_digit()))
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or_else(|| {
                FrameIoError::MalformedHeader(format!(
                    "bad {what}: {:?}",
                    String::from_utf8_lossy(tok)
                ))
            })
    }
}

pub fn decode_ppm(bytes: &[u8]) -> Result<Frame, FrameIoError> {
    if !bytes.starts_with(b"P6") {
        return Err(FrameIoError::MalformedHeader("magic is not P6".into()));
    }
    let mut cur = HeaderCursor { bytes, pos: 2 };
    if !cur.bytes.get(2).is_some_and(|b| b.is_ascii_whitespace() || *b == b'#') {
        return Err(FrameIoError::MalformedHeader("magic is not P6".into()));
    }
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(FrameIoError::MalformedHeader(format!(
            "dimensions must be positive, got {width}x{height}"
        )));
    }
    if maxval != 255 {
        return Err(FrameIoError::MalformedHeader(format!(
            "maxval must be 255, got {maxval}"
        )));
    }
    // exactly one whitespace byte separates maxval from the raster
    match bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        _ => {
            return Err(FrameIoError::MalformedHeader(
                "missing whitespace after maxval".into(),
            ))
        }
    }
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(3))
        .ok_or_else(|| FrameIoError::MalformedHeader("dimensions overflow".into()))?;
    let raster = &bytes[cur.pos..];
    if raster.len() < expected {
        return Err(FrameIoError::TruncatedPayload {
            expected,
            actual: raster.len(),
        });
    }
    Frame::new(width, height, raster[..expected].to_vec())
}

pub fn encode_ppm(frame: &Frame) -> Vec<u8> {
    let header = format!("P6\n{} {}\n255\n", frame.width, frame.height);
    let mut out = Vec::with_capacity(header.len() + frame.pixels.len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(&frame.pixels);
    out
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> FrameIoError + '_ {
    move |source| FrameIoError::IoFailure {
        path: path.to_path_buf(),
        source,
    }
}

pub fn read_ppm_file(path: &Path) -> Result<Frame, FrameIoError> {
    let bytes = fs::read(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            FrameIoError::MissingFrameFile(path.to_path_buf())
        } else {
            io_err(path)(e)
        }
    })?;
    decode_ppm(&bytes).map_err(|e| FrameIoError::FrameFile {
        path: path.to_path_buf(),
        source: Box::new(e),
    })
}

pub fn read_sequence(manifest_path: &Path) -> Result<FrameSequence, FrameIoError> {
    let bad = |reason: String| FrameIoError::BadManifest {
        path: manifest_path.to_path_buf(),
        reason,
    };
    let text = fs::read_to_string(manifest_path).map_err(io_err(manifest_path))?;
    let mut lines = text.lines();
    if lines.next().map(str::trim_end) != Some(MANIFEST_MAGIC) {
        return Err(bad(format!("first line must be {MANIFEST_MAGIC:?}")));
    }
    let base = manifest_path.parent().unwrap_or(Path::new(""));
    let mut fps = None;
    let mut files = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("fps ") {
            if i != 0 {
                return Err(bad("fps line must directly follow the magic line".into()));
            }
            let n: u32 = rest
                .trim()
                .parse()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| bad(format!("bad fps value {rest:?}")))?;
            fps = Some(n);
            continue;
        }
        files.push(base.join(line));
    }
    if files.is_empty() {
        return Err(bad("no frame files listed".into()));
    }

    // par_iter + collect preserves manifest order
    let frames = files
        .par_iter()
        .map(|p| read_ppm_file(p))
        .collect::<Result<Vec<_>, _>>()?;

    let first = &frames[0];
    for (index, f) in frames.iter().enumerate() {
        if !f.same_dimensions(first) {
            return Err(FrameIoError::DimensionMismatch {
                index,
                expected_w: first.width,
                expected_h: first.height,
                actual_w: f.width,
                actual_h: f.height,
            });
        }
    }
    FrameSequence::new(frames, fps)
}

pub fn frame_file_name(index: usize) -> String {
    format!("frame_{index:06}.ppm")
}

/// Writes `frame_NNNNNN.ppm` files plus a manifest into `dir`, creating it if
/// needed. Returns the manifest path.
pub fn write_sequence(seq: &FrameSequence, dir: &Path) -> Result<PathBuf, FrameIoError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut manifest = String::new();
    manifest.push_str(MANIFEST_MAGIC);
    manifest.push('\n');
    if let Some(fps) = seq.fps {
        let _ = writeln!(manifest, "fps {fps}");
    }
    for (i, frame) in seq.frames.iter().enumerate() {
        let name = frame_file_name(i);
        let path = dir.join(&name);
        fs::write(&path, encode_ppm(frame)).map_err(io_err(&path))?;
        manifest.push_str(&name);
        manifest.push('\n');
    }
    let manifest_path = dir.join(MANIFEST_FILE_NAME);
    fs::write(&manifest_path, manifest).map_err(io_err(&manifest_path))?;
    Ok(manifest_path)
}
