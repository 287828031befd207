//! Video compression by inter-frame redundancy removal.
//!
//! Each frame after the first is reduced to a shift (how far content moved
//! since the previous frame) plus the pixels that shift cannot explain.
//! Decoding walks forward from the raw first frame, copying the redundant
//! pixels out of the previous reconstruction.
//!
//! - [`frame_io`]: RGB8 frames, PPM files and sequence manifests.
//! - [`tracking`]: shift estimation, trajectory files, stride windows.
//! - [`codec`]: region arithmetic, per-frame and whole-video (de)compression.
//! - [`container`]: the `.r2s` file format.
//! - [`metrics`]: compression and loss percentages, stride sweeps.

pub mod codec;
pub mod container;
pub mod frame_io;
pub mod metrics;
pub mod tracking;

pub use codec::{
    compress_frame_global, compress_frame_grid, compress_video, decompress_frame, decompress_video,
    export_masked_frame, redundant_region, CompressConfig, CompressedFrame, ModeConfig, R2SStream,
    RegionPair, ShiftSource, StreamMode, TrackerSource,
};
pub use container::{deserialize_stream, serialize_stream};
pub use frame_io::{Frame, FrameSequence};
pub use tracking::{GridSpec, Shift, ShiftField};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    FrameIo(#[from] frame_io::FrameIoError),
    #[error(transparent)]
    Tracking(#[from] tracking::TrackingError),
    #[error(transparent)]
    Codec(#[from] codec::CodecError),
    #[error(transparent)]
    Container(#[from] container::ContainerError),
    #[error(transparent)]
    Metrics(#[from] metrics::MetricsError),
    #[error("invalid configuration: {0}")]
    Config(String),
}
