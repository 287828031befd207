#![allow(dead_code)]

use r2s::{Frame, FrameSequence, Shift};
use rand::{rngs::StdRng, Rng, SeedableRng};

pub fn random_frame(rng: &mut StdRng, w: usize, h: usize) -> Frame {
    Frame::new(w, h, (0..w * h * 3).map(|_| rng.gen()).collect()).unwrap()
}

/// `prev` moved by `shift`; pixels with no source are fresh random content.
pub fn translate(rng: &mut StdRng, prev: &Frame, shift: Shift) -> Frame {
    let (w, h) = (prev.width(), prev.height());
    let mut out = random_frame(rng, w, h);
    let region = r2s::redundant_region(shift, w, h).redundant;
    for r in region.row_lo..region.row_hi {
        let sr = (r as i64 - shift.dy as i64) as usize;
        let sc = (region.col_lo as i64 - shift.dx as i64) as usize;
        out.span_mut(region.col_lo, r, region.width())
            .copy_from_slice(prev.span(sc, sr, region.width()));
    }
    out
}

/// Constant-velocity pan with a fresh random border every frame.
pub fn pan(seed: u64, w: usize, h: usize, n: usize, shift: Shift) -> FrameSequence {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut frames = vec![random_frame(&mut rng, w, h)];
    for _ in 1..n {
        let next = translate(&mut rng, frames.last().unwrap(), shift);
        frames.push(next);
    }
    FrameSequence::new(frames, Some(30)).unwrap()
}

/// Per-frame motion of the accelerating pan: frame `f` moved by this much
/// relative to frame `f - 1`.
pub fn accelerating_motion(f: usize) -> Shift {
    Shift::new(1 + f as i32 / 6, f as i32 / 10)
}

/// A viewport sliding over a world of flat 8x8 tiles with random colours.
/// Flat tiles make reconstruction error grow with the size of a shift error
/// instead of saturating at the first wrong pixel.
pub fn accelerating_pan(seed: u64, w: usize, h: usize, n: usize) -> FrameSequence {
    const TILE: usize = 8;
    let mut rng = StdRng::seed_from_u64(seed);
    let (mut ox, mut oy) = (0i64, 0i64);
    let mut origins = vec![(0, 0)];
    for f in 1..n {
        let m = accelerating_motion(f);
        ox -= m.dx as i64;
        oy -= m.dy as i64;
        origins.push((ox, oy));
    }
    let min_x = origins.iter().map(|o| o.0).min().unwrap();
    let min_y = origins.iter().map(|o| o.1).min().unwrap();
    let world_w = (w as i64 - min_x) as usize;
    let world_h = (h as i64 - min_y) as usize;
    let tiles_w = world_w.div_ceil(TILE);
    let tiles_h = world_h.div_ceil(TILE);
    let colors: Vec<[u8; 3]> = (0..tiles_w * tiles_h).map(|_| rng.gen()).collect();
    let frames = origins
        .iter()
        .map(|&(ox, oy)| {
            let mut fr = Frame::black(w, h);
            for r in 0..h {
                for c in 0..w {
                    let x = (c as i64 + ox - min_x) as usize;
                    let y = (r as i64 + oy - min_y) as usize;
                    fr.set_pixel(c, r, colors[(y / TILE) * tiles_w + x / TILE]);
                }
            }
            fr
        })
        .collect();
    FrameSequence::new(frames, Some(30)).unwrap()
}

/// Random sequences mixing static, translated and fresh-noise frames.
pub fn mixed_sequence(rng: &mut StdRng, max_dim: usize, max_len: usize) -> FrameSequence {
    let w = rng.gen_range(1..=max_dim);
    let h = rng.gen_range(1..=max_dim);
    let n = rng.gen_range(1..=max_len);
    let mut frames = vec![random_frame(rng, w, h)];
    for _ in 1..n {
        let prev = frames.last().unwrap();
        let next = match rng.gen_range(0..4) {
            0 => prev.clone(),
            1 => random_frame(rng, w, h),
            _ => {
                let s = Shift::new(rng.gen_range(-3..=3), rng.gen_range(-3..=3));
                translate(rng, prev, s)
            }
        };
        frames.push(next);
    }
    FrameSequence::new(frames, None).unwrap()
}
