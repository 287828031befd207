mod common;

use std::fs;

use r2s::frame_io::{read_sequence, write_sequence};
use r2s::tracking::{load_trajectories, PointLayout};
use r2s::{
    compress_video, decompress_video, deserialize_stream, serialize_stream, CompressConfig, GridSpec,
    Shift, ShiftSource, StreamMode, TrackerSource,
};

#[test]
fn disk_round_trip_through_container() {
    let tmp = tempfile::tempdir().unwrap();
    let seq = common::pan(21, 37, 23, 9, Shift::new(-2, 3));
    let manifest = write_sequence(&seq, &tmp.path().join("in")).unwrap();
    let loaded = read_sequence(&manifest).unwrap();
    assert_eq!(loaded.frames(), seq.frames());
    assert_eq!(loaded.fps(), Some(30));

    let stream = compress_video(&loaded, &CompressConfig::global(ShiftSource::Builtin { radius: 4 })).unwrap();
    let path = tmp.path().join("pan.r2s");
    fs::write(&path, serialize_stream(&stream)).unwrap();
    let back = deserialize_stream(&fs::read(&path).unwrap()).unwrap();
    assert_eq!(back, stream);

    let out = decompress_video(&back).unwrap();
    let manifest = write_sequence(&out, &tmp.path().join("out")).unwrap();
    assert_eq!(read_sequence(&manifest).unwrap().frames(), seq.frames());
}

#[test]
fn trajectory_file_feeds_global_compression() {
    let tmp = tempfile::tempdir().unwrap();
    let seq = common::pan(22, 30, 20, 4, Shift::new(3, -1));
    let csv = tmp.path().join("t.csv");
    fs::write(&csv, "frame,point,dx,dy\n1,0,2.6,-1.2\n2,0,3,-0.5\n3,0,3.4,-1\n").unwrap();
    let traj = load_trajectories(&csv, seq.len(), PointLayout::Global).unwrap();
    assert_eq!(traj.global(2), Shift::new(3, -1));

    let stream = compress_video(&seq, &CompressConfig::global(ShiftSource::External(traj))).unwrap();
    assert_eq!(stream.tracker, TrackerSource::External);
    assert_eq!(decompress_video(&stream).unwrap().frames(), seq.frames());
}

#[test]
fn trajectory_file_feeds_grid_compression() {
    let tmp = tempfile::tempdir().unwrap();
    let seq = common::pan(23, 32, 16, 3, Shift::new(1, 0));
    let grid = GridSpec::new(16, 16).unwrap();
    let csv = tmp.path().join("t.csv");
    fs::write(&csv, "frame,point,dx,dy\n1,0,1,0\n1,1,1,0\n2,1,1,0\n").unwrap();
    let traj = load_trajectories(&csv, seq.len(), PointLayout::Grid { blocks: 2 }).unwrap();
    let stream = compress_video(&seq, &CompressConfig::grid(grid, 0.0, ShiftSource::External(traj))).unwrap();
    assert_eq!(stream.mode, StreamMode::Grid(grid));
    assert_eq!(decompress_video(&stream).unwrap().frames(), seq.frames());
}
