//! The `.r2s` single-file container.
//!
//! All integers are little-endian.
//!
//! ```text
//! header (26 bytes)
//!   magic        4  "R2SC"
//!   version      u16 = 1
//!   mode         u8  0 global, 1 grid
//!   width        u32
//!   height       u32
//!   frame_count  u32 (including the raw first frame)
//!   block_w      u16 (0 in global mode)
//!   block_h      u16 (0 in global mode)
//!   tracker_id   u8  0 builtin, 1 external
//!   reserved     2 bytes, zero
//! first frame    width * height * 3 raw RGB bytes
//! per following frame, global mode:
//!   dx i32, dy i32, payload_len u32, payload, crc32(dx, dy, payload)
//! per following frame, grid mode:
//!   per block (row-major): flag u8 (0 redundant, 1 raw), dx i16, dy i16
//!   payload_len u32, payload, crc32(block records, payload)
//! ```
//!
//! CRCs are CRC-32/IEEE. Frame indices in errors count the raw first frame
//! as frame 0.

use thiserror::Error;

use crate::codec::{CompressedFrame, R2SStream, StreamMode, TrackerSource};
use crate::frame_io::Frame;
use crate::tracking::{GridSpec, Shift, ShiftField};

pub const MAGIC: [u8; 4] = *b"R2SC";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 26;
/// Fixed bytes of a global record besides its payload.
pub const GLOBAL_RECORD_OVERHEAD: usize = 16;
pub const BLOCK_RECORD_LEN: usize = 5;
/// Fixed bytes of a grid record besides its block records and payload.
pub const GRID_RECORD_OVERHEAD: usize = 8;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ContainerError {
    #[error("bad magic {0:02x?}, expected \"R2SC\"")]
    BadMagic([u8; 4]),
    #[error("unsupported container version {0}")]
    UnsupportedVersion(u16),
    #[error("container truncated while reading {what} (frame {frame})")]
    Truncated { frame: usize, what: &'static str },
    #[error("CRC mismatch in frame {frame}: stored {stored:08x}, computed {computed:08x}")]
    CrcMismatch {
        frame: usize,
        stored: u32,
        computed: u32,
    },
    #[error("inconsistent lengths in frame {frame}: {detail}")]
    InconsistentLengths { frame: usize, detail: String },
    #[error("invalid header: {0}")]
    InvalidHeader(String),
    #[error("invalid record in frame {frame}: {detail}")]
    InvalidRecord { frame: usize, detail: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContainerHeader {
    pub version: u16,
    pub mode: StreamMode,
    pub width: u32,
    pub height: u32,
    pub frame_count: u32,
    pub tracker: TrackerSource,
}

impl ContainerHeader {
    pub fn mode_byte(&self) -> u8 {
        match self.mode {
            StreamMode::Global => 0,
            StreamMode::Grid(_) => 1,
        }
    }

    pub fn block_dims(&self) -> (u16, u16) {
        match self.mode {
            StreamMode::Global => (0, 0),
            StreamMode::Grid(g) => (g.block_w as u16, g.block_h as u16),
        }
    }

    pub fn tracker_id(&self) -> u8 {
        match self.tracker {
            TrackerSource::Builtin => 0,
            TrackerSource::External => 1,
        }
    }

    fn to_bytes(self) -> [u8; HEADER_LEN] {
        let mut b = [0u8; HEADER_LEN];
        let (bw, bh) = self.block_dims();
        b[0..4].copy_from_slice(&MAGIC);
        b[4..6].copy_from_slice(&self.version.to_le_bytes());
        b[6] = self.mode_byte();
        b[7..11].copy_from_slice(&self.width.to_le_bytes());
        b[11..15].copy_from_slice(&self.height.to_le_bytes());
        b[15..19].copy_from_slice(&self.frame_count.to_le_bytes());
        b[19..21].copy_from_slice(&bw.to_le_bytes());
        b[21..23].copy_from_slice(&bh.to_le_bytes());
        b[23] = self.tracker_id();
        b
    }
}

pub fn parse_header(bytes: &[u8]) -> Result<ContainerHeader, ContainerError> {
    if bytes.len() >= 4 && bytes[0..4] != MAGIC {
        return Err(ContainerError::BadMagic(bytes[0..4].try_into().unwrap()));
    }
    if bytes.len() < HEADER_LEN {
        return Err(ContainerError::Truncated {
            frame: 0,
            what: "header",
        });
    }
    let u16_at = |i: usize| u16::from_le_bytes([bytes[i], bytes[i + 1]]);
    let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
    let version = u16_at(4);
    if version != VERSION {
        return Err(ContainerError::UnsupportedVersion(version));
    }
    let (width, height, frame_count) = (u32_at(7), u32_at(11), u32_at(15));
    let (bw, bh) = (u16_at(19), u16_at(21));
    let invalid = |s: String| Err(ContainerError::InvalidHeader(s));
    if width == 0 || height == 0 {
        return invalid(format!("dimensions must be positive, got {width}x{height}"));
    }
    if frame_count == 0 {
        return invalid("frame_count must be at least 1".into());
    }
    let mode = match bytes[6] {
        0 if bw == 0 && bh == 0 => StreamMode::Global,
        0 => return invalid(format!("global mode with block size {bw}x{bh}")),
        1 if bw > 0 && bh > 0 => StreamMode::Grid(GridSpec {
            block_w: bw as usize,
            block_h: bh as usize,
        }),
        1 => return invalid(format!("grid mode with block size {bw}x{bh}")),
        m => return invalid(format!("unknown mode {m}")),
    };
    let tracker = match bytes[23] {
        0 => TrackerSource::Builtin,
        1 => TrackerSource::External,
        t => return invalid(format!("unknown tracker id {t}")),
    };
    if bytes[24..26] != [0, 0] {
        return invalid("reserved bytes must be zero".into());
    }
    Ok(ContainerHeader {
        version,
        mode,
        width,
        height,
        frame_count,
        tracker,
    })
}

/// Serialized size of one compressed frame's record.
pub fn record_size(cf: &CompressedFrame) -> usize {
    match cf {
        CompressedFrame::Global { payload, .. } => GLOBAL_RECORD_OVERHEAD + payload.len(),
        CompressedFrame::Grid { field, payload } => {
            BLOCK_RECORD_LEN * field.len() + GRID_RECORD_OVERHEAD + payload.len()
        }
    }
}

pub fn serialized_size(stream: &R2SStream) -> usize {
    HEADER_LEN
        + 3 * stream.width * stream.height
        + stream.frames.iter().map(record_size).sum::<usize>()
}

fn stream_header(stream: &R2SStream) -> ContainerHeader {
    ContainerHeader {
        version: VERSION,
        mode: stream.mode,
        width: stream.width as u32,
        height: stream.height as u32,
        frame_count: stream.frame_count() as u32,
        tracker: stream.tracker,
    }
}

/// Serializes a stream.
///
/// # Panics
///
/// Panics if the stream breaks its own invariants (see
/// [`R2SStream::validate`]) or a grid shift does not fit in 16 bits.
pub fn serialize_stream(stream: &R2SStream) -> Vec<u8> {
    stream.validate().expect("stream invariants");
    let mut out = Vec::with_capacity(serialized_size(stream));
    out.extend_from_slice(&stream_header(stream).to_bytes());
    out.extend_from_slice(stream.first_frame.pixels());
    for cf in &stream.frames {
        let start = out.len();
        match cf {
            CompressedFrame::Global { shift, payload } => {
                out.extend_from_slice(&shift.dx.to_le_bytes());
                out.extend_from_slice(&shift.dy.to_le_bytes());
                out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
                out.extend_from_slice(payload);
                let mut h = crc32fast::Hasher::new();
                h.update(&out[start..start + 8]);
                h.update(payload);
                out.extend_from_slice(&h.finalize().to_le_bytes());
            }
            CompressedFrame::Grid { field, payload } => {
                for (s, &redundant) in field.shifts().iter().zip(field.redundant()) {
                    assert!(s.is_representable(), "grid shift {s:?} exceeds 16 bits");
                    out.push(if redundant { 0 } else { 1 });
                    out.extend_from_slice(&(s.dx as i16).to_le_bytes());
                    out.extend_from_slice(&(s.dy as i16).to_le_bytes());
                }
                let blocks_end = out.len();
                out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
                out.extend_from_slice(payload);
                let mut h = crc32fast::Hasher::new();
                h.update(&out[start..blocks_end]);
                h.update(payload);
                out.extend_from_slice(&h.finalize().to_le_bytes());
            }
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    frame: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &'static str) -> Result<&'a [u8], ContainerError> {
        if self.bytes.len() - self.pos < n {
            return Err(ContainerError::Truncated {
                frame: self.frame,
                what,
            });
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self, what: &'static str) -> Result<u32, ContainerError> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }
}

fn check_crc(frame: usize, covered: &[&[u8]], stored: u32) -> Result<(), ContainerError> {
    let mut h = crc32fast::Hasher::new();
    for part in covered {
        h.update(part);
    }
    let computed = h.finalize();
    if computed != stored {
        return Err(ContainerError::CrcMismatch {
            frame,
            stored,
            computed,
        });
    }
    Ok(())
}

pub fn deserialize_stream(bytes: &[u8]) -> Result<R2SStream, ContainerError> {
    let header = parse_header(bytes)?;
    let (w, h) = (header.width as usize, header.height as usize);
    let mut rd = Reader {
        bytes,
        pos: HEADER_LEN,
        frame: 0,
    };
    let raster_len = w
        .checked_mul(h)
        .and_then(|n| n.checked_mul(3))
        .ok_or_else(|| ContainerError::InvalidHeader("dimensions overflow".into()))?;
    let first = rd.take(raster_len, "first frame")?;
    let first_frame = Frame::new(w, h, first.to_vec()).expect("raster length checked");

    let mut frames = Vec::new();
    for frame in 1..header.frame_count as usize {
        rd.frame = frame;
        let cf = match header.mode {
            StreamMode::Global => {
                let shift_bytes = rd.take(8, "shift")?;
                let dx = i32::from_le_bytes(shift_bytes[0..4].try_into().unwrap());
                let dy = i32::from_le_bytes(shift_bytes[4..8].try_into().unwrap());
                let len = rd.u32("payload length")? as usize;
                let payload = rd.take(len, "payload")?;
                let crc = rd.u32("crc")?;
                check_crc(frame, &[shift_bytes, payload], crc)?;
                CompressedFrame::Global {
                    shift: Shift::new(dx, dy),
                    payload: payload.to_vec(),
                }
            }
            StreamMode::Grid(grid) => {
                let blocks = grid.block_count(w, h);
                let records = rd.take(BLOCK_RECORD_LEN * blocks, "block records")?;
                let len = rd.u32("payload length")? as usize;
                let payload = rd.take(len, "payload")?;
                let crc = rd.u32("crc")?;
                check_crc(frame, &[records, payload], crc)?;
                let mut shifts = Vec::with_capacity(blocks);
                let mut redundant = Vec::with_capacity(blocks);
                for (i, rec) in records.chunks_exact(BLOCK_RECORD_LEN).enumerate() {
                    redundant.push(match rec[0] {
                        0 => true,
                        1 => false,
                        f => {
                            return Err(ContainerError::InvalidRecord {
                                frame,
                                detail: format!("block {i} has flag {f}"),
                            })
                        }
                    });
                    shifts.push(Shift::new(
                        i16::from_le_bytes([rec[1], rec[2]]) as i32,
                        i16::from_le_bytes([rec[3], rec[4]]) as i32,
                    ));
                }
                let field = ShiftField::new_unchecked(grid, w, h, shifts, redundant)
                    .expect("block count taken from grid");
                CompressedFrame::Grid {
                    field,
                    payload: payload.to_vec(),
                }
            }
        };
        let expected = cf.expected_payload_len(w, h);
        if cf.payload().len() != expected {
            return Err(ContainerError::InconsistentLengths {
                frame,
                detail: format!(
                    "payload is {} bytes, shift metadata implies {expected}",
                    cf.payload().len()
                ),
            });
        }
        frames.push(cf);
    }
    if rd.pos != bytes.len() {
        return Err(ContainerError::InconsistentLengths {
            frame: header.frame_count as usize,
            detail: format!("{} trailing bytes", bytes.len() - rd.pos),
        });
    }
    Ok(R2SStream {
        width: w,
        height: h,
        mode: header.mode,
        tracker: header.tracker,
        first_frame,
        frames,
    })
}
