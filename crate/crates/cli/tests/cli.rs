use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use r2s::frame_io::{read_sequence, write_sequence};
use r2s::{Frame, FrameSequence};
use rand::{rngs::StdRng, Rng, SeedableRng};

fn r2s(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_r2s"))
        .args(args)
        .output()
        .expect("run r2s")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn assert_ok(o: &Output) {
    assert!(o.status.success(), "stderr: {}", stderr(o));
    assert!(o.stderr.is_empty(), "diagnostic on success: {}", stderr(o));
}

fn assert_fails(o: &Output, needle: &str) {
    assert_eq!(o.status.code(), Some(1), "stdout: {}", stdout(o));
    assert!(stderr(o).contains(needle), "stderr {:?} lacks {needle:?}", stderr(o));
}

fn random_frame(rng: &mut StdRng, w: usize, h: usize) -> Frame {
    Frame::new(w, h, (0..w * h * 3).map(|_| rng.gen()).collect()).unwrap()
}

/// Pan by (dx, dy) per frame, fresh random border.
fn pan(seed: u64, w: usize, h: usize, n: usize, dx: usize, dy: usize) -> FrameSequence {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut frames = vec![random_frame(&mut rng, w, h)];
    for _ in 1..n {
        let prev = frames.last().unwrap();
        let mut cur = random_frame(&mut rng, w, h);
        for r in dy..h {
            cur.span_mut(dx, r, w - dx).copy_from_slice(prev.span(0, r - dy, w - dx));
        }
        frames.push(cur);
    }
    FrameSequence::new(frames, Some(30)).unwrap()
}

/// Flat-tile world scrolled with growing speed.
fn accelerating_pan(w: usize, h: usize, n: usize) -> FrameSequence {
    let mut rng = StdRng::seed_from_u64(5);
    let motion: Vec<usize> = (0..n).map(|f| if f == 0 { 0 } else { 1 + f / 6 }).collect();
    let travel: usize = motion.iter().sum();
    let tiles_w = (w + travel).div_ceil(8);
    let tiles_h = h.div_ceil(8);
    let colors: Vec<[u8; 3]> = (0..tiles_w * tiles_h).map(|_| rng.gen()).collect();
    let mut origin = travel;
    let frames = motion
        .iter()
        .map(|&m| {
            origin -= m;
            let mut f = Frame::black(w, h);
            for r in 0..h {
                for c in 0..w {
                    f.set_pixel(c, r, colors[(r / 8) * tiles_w + (c + origin) / 8]);
                }
            }
            f
        })
        .collect();
    FrameSequence::new(frames, Some(30)).unwrap()
}

fn write(seq: &FrameSequence, dir: &Path) -> String {
    write_sequence(seq, dir).unwrap().to_str().unwrap().to_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn key(out: &str, k: &str) -> String {
    out.lines()
        .find_map(|l| l.strip_prefix(&format!("{k}=")))
        .unwrap_or_else(|| panic!("no {k}= in {out}"))
        .to_owned()
}

#[test]
fn grid_compress_decompress_is_lossless() {
    let tmp = tempfile::tempdir().unwrap();
    let mut rng = StdRng::seed_from_u64(1);
    let mut seq_frames = pan(2, 40, 24, 6, 2, 1).into_frames();
    seq_frames.push(random_frame(&mut rng, 40, 24));
    let seq = FrameSequence::new(seq_frames, Some(24)).unwrap();
    let manifest = write(&seq, &tmp.path().join("seq"));
    let out = tmp.path().join("out.r2s");
    let o = r2s(&["compress", "--input", &manifest, "--output", path(&out), "--mode", "grid", "--tau", "0", "--block", "8x8", "--radius", "3"]);
    assert_ok(&o);
    assert_eq!(key(&stdout(&o), "frames"), "7");

    let dec = tmp.path().join("dec");
    let o = r2s(&["decompress", "--input", path(&out), "--output", path(&dec)]);
    assert_ok(&o);
    let back = read_sequence(&dec.join("manifest")).unwrap();
    assert_eq!(back.frames(), seq.frames());
}

#[test]
fn global_summary_matches_region_arithmetic() {
    let tmp = tempfile::tempdir().unwrap();
    let seq = pan(3, 64, 48, 30, 3, 2);
    let manifest = write(&seq, &tmp.path().join("seq"));
    let out = tmp.path().join("pan.r2s");
    let o = r2s(&["compress", "--input", &manifest, "--output", path(&out), "--mode", "global", "--radius", "16"]);
    assert_ok(&o);
    // header + raw first frame + 29 records of 8 shift + 4 len + 798 payload + 4 crc
    let bytes = 26 + 9216 + 29 * (16 + 798);
    let pct = 100.0 * (1.0 - bytes as f64 / (30.0 * 9216.0));
    let s = stdout(&o);
    assert_eq!(key(&s, "bytes"), bytes.to_string());
    assert_eq!(key(&s, "compression_pct"), format!("{pct:.4}"));
    assert_eq!(fs::metadata(&out).unwrap().len(), bytes as u64);
}

#[test]
fn malformed_trajectory_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = write(&pan(4, 16, 16, 3, 1, 0), &tmp.path().join("seq"));
    let csv = tmp.path().join("t.csv");
    fs::write(&csv, "frame,point,dx,dy\n1,0,oops,0\n").unwrap();
    let out = tmp.path().join("o.r2s");
    let o = r2s(&["compress", "--input", &manifest, "--output", path(&out), "--mode", "global", "--trajectory", path(&csv)]);
    assert_fails(&o, "bad trajectory CSV");
    assert!(!out.exists());
}

#[test]
fn trajectory_drives_compression() {
    let tmp = tempfile::tempdir().unwrap();
    let seq = pan(5, 32, 20, 4, 2, 1);
    let manifest = write(&seq, &tmp.path().join("seq"));
    let csv = tmp.path().join("t.csv");
    fs::write(&csv, "frame,point,dx,dy\n1,0,2.4,0.5\n2,0,1.6,1\n3,0,2,1.2\n").unwrap();
    let out = tmp.path().join("o.r2s");
    assert_ok(&r2s(&["compress", "--input", &manifest, "--output", path(&out), "--trajectory", path(&csv)]));
    let o = r2s(&["inspect", "--input", path(&out)]);
    assert_ok(&o);
    let s = stdout(&o);
    assert_eq!(key(&s, "tracker_id"), "1");
    assert!(s.contains("frame=1 record_bytes=") && s.contains("dx=2 dy=1"));

    let dec = tmp.path().join("dec");
    assert_ok(&r2s(&["decompress", "--input", path(&out), "--output", path(&dec)]));
    assert_eq!(read_sequence(&dec.join("manifest")).unwrap().frames(), seq.frames());
}

#[test]
fn conflicting_options_fail() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = write(&pan(6, 16, 16, 2, 1, 0), &tmp.path().join("seq"));
    let out = tmp.path().join("o.r2s");
    let o = r2s(&["compress", "--input", &manifest, "--output", path(&out), "--mode", "global", "--block", "8x8"]);
    assert_fails(&o, "--mode grid");
    let o = r2s(&["compress", "--input", &manifest, "--output", path(&out), "--radius", "2", "--trajectory", "x.csv"]);
    assert_fails(&o, "--trajectory");
    let o = r2s(&["compress", "--input", "/nonexistent/manifest", "--output", path(&out)]);
    assert_fails(&o, "error:");
    let o = r2s(&["compress", "--bogus"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn corrupted_container_names_the_frame() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = write(&pan(7, 32, 24, 5, 2, 2), &tmp.path().join("seq"));
    let out = tmp.path().join("o.r2s");
    assert_ok(&r2s(&["compress", "--input", &manifest, "--output", path(&out), "--radius", "4"]));
    let mut bytes = fs::read(&out).unwrap();
    // last frame's payload sits just before its trailing CRC
    let at = bytes.len() - 5;
    bytes[at] ^= 0x40;
    fs::write(&out, &bytes).unwrap();
    let o = r2s(&["decompress", "--input", path(&out), "--output", path(&tmp.path().join("dec"))]);
    assert_fails(&o, "CRC mismatch in frame 4");

    fs::write(&out, &bytes[..bytes.len() - 2]).unwrap();
    let o = r2s(&["decompress", "--input", path(&out), "--output", path(&tmp.path().join("dec"))]);
    assert_fails(&o, "truncated");
}

#[test]
fn single_frame_container() {
    let tmp = tempfile::tempdir().unwrap();
    let seq = pan(8, 10, 10, 1, 0, 0);
    let manifest = write(&seq, &tmp.path().join("seq"));
    let out = tmp.path().join("one.r2s");
    assert_ok(&r2s(&["compress", "--input", &manifest, "--output", path(&out)]));

    let o = r2s(&["inspect", "--input", path(&out)]);
    assert_ok(&o);
    let s = stdout(&o);
    assert_eq!(key(&s, "frame_count"), "1");
    assert!(!s.lines().any(|l| l.starts_with("frame=")));

    let dec = tmp.path().join("dec");
    assert_ok(&r2s(&["decompress", "--input", path(&out), "--output", path(&dec)]));
    let back = read_sequence(&dec.join("manifest")).unwrap();
    assert_eq!(back.frames(), seq.frames());
}

#[test]
fn inspect_grid_container() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = write(&pan(9, 48, 32, 30, 1, 1), &tmp.path().join("seq"));
    let out = tmp.path().join("g.r2s");
    assert_ok(&r2s(&["compress", "--input", &manifest, "--output", path(&out), "--mode", "grid", "--radius", "2"]));
    let o = r2s(&["inspect", "--input", path(&out)]);
    assert_ok(&o);
    let s = stdout(&o);
    assert!(s.lines().any(|l| l == "mode=grid"));
    assert!(s.lines().any(|l| l == "frame_count=30"));
    assert_eq!(key(&s, "block_w"), "16");
    assert_eq!(s.lines().filter(|l| l.starts_with("frame=")).count(), 29);
    assert_eq!(key(&s, "total_bytes"), fs::metadata(&out).unwrap().len().to_string());
}

#[test]
fn inspect_rejects_ppm() {
    let tmp = tempfile::tempdir().unwrap();
    write(&pan(10, 4, 4, 1, 0, 0), tmp.path());
    let o = r2s(&["inspect", "--input", path(&tmp.path().join("frame_000000.ppm"))]);
    assert_fails(&o, "bad magic");
}

#[test]
fn bench_sweep() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = write(&accelerating_pan(80, 48, 32), &tmp.path().join("seq"));
    let csv = tmp.path().join("sweep.csv");
    let o = r2s(&["bench", "--input", &manifest, "--output", path(&csv), "--strides", "2,8,16", "--radius", "8"]);
    assert_ok(&o);
    assert_eq!(stdout(&o).lines().count(), 4);
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("stride,compression_pct,loss_pct,ms_per_frame"));
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(str::to_owned).collect()).collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows.iter().map(|r| r[0].as_str()).collect::<Vec<_>>(), ["2", "8", "16"]);
    assert_eq!(rows[0][2], "0.0000");
    let loss: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(loss[0] <= loss[1] && loss[1] <= loss[2], "{loss:?}");
    // four decimals everywhere
    assert!(rows.iter().flatten().skip(1).all(|v| v.contains('.') || v.chars().all(|c| c.is_ascii_digit())));
}

#[test]
fn bench_pure_translation_stride_two() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = write(&pan(11, 32, 24, 8, 2, 1), &tmp.path().join("seq"));
    let csv = tmp.path().join("s.csv");
    assert_ok(&r2s(&["bench", "--input", &manifest, "--output", path(&csv), "--strides", "2"]));
    let text = fs::read_to_string(&csv).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "2");
    assert_eq!(row[2], "0.0000");
}

#[test]
fn bench_rejects_odd_stride() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = write(&pan(12, 8, 8, 4, 1, 0), &tmp.path().join("seq"));
    let csv: PathBuf = tmp.path().join("s.csv");
    let o = r2s(&["bench", "--input", &manifest, "--output", path(&csv), "--strides", "3"]);
    assert_fails(&o, "stride 3");
    assert!(!csv.exists());
}

#[test]
fn export_masked_frames() {
    let tmp = tempfile::tempdir().unwrap();
    let seq = pan(13, 20, 12, 3, 2, 1);
    let manifest = write(&seq, &tmp.path().join("seq"));
    let masked = tmp.path().join("masked");
    let out = tmp.path().join("o.r2s");
    assert_ok(&r2s(&["compress", "--input", &manifest, "--output", path(&out), "--radius", "4", "--export-masked", path(&masked)]));
    let m = read_sequence(&masked.join("manifest")).unwrap();
    assert_eq!(m.len(), 3);
    assert_eq!(m.frames()[0], seq.frames()[0]);
    // redundant interior is black, the fresh strip is kept
    assert_eq!(m.frames()[1].pixel(10, 6), [0, 0, 0]);
    assert_eq!(m.frames()[1].pixel(0, 0), seq.frames()[1].pixel(0, 0));
}
