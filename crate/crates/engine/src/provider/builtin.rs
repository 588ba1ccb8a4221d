//! Small classical stand-ins for model-backed roles: block-matching flow,
//! content-difference cut detection and linear frame interpolation.

use locot2v_core::frame::{mean_abs_diff, FlowField, GrayFrame};

use crate::error::Result;

/// Block-matching flow over `a`'s grid: `a(p) ≈ b(p + flow(p))`. Each block
/// takes the displacement within `radius` minimizing mean absolute error
/// over the overlapping pixels; ties go to the shorter displacement.
pub fn block_flow(a: &GrayFrame, b: &GrayFrame, block: usize, radius: i64) -> FlowField {
    let (w, h) = (a.width, a.height);
    let mut flow = FlowField::uniform(w, h, 0.0, 0.0);
    let block = block.max(1);
    let mut by = 0;
    while by < h {
        let mut bx = 0;
        while bx < w {
            let x1 = (bx + block).min(w);
            let y1 = (by + block).min(h);
            let mut best = (f64::INFINITY, 0i64, 0i64);
            for dy in -radius..=radius {
                for dx in -radius..=radius {
                    let mut sum = 0u64;
                    let mut n = 0u64;
                    for y in by..y1 {
                        let ty = y as i64 + dy;
                        if ty < 0 || ty >= h as i64 {
                            continue;
                        }
                        for x in bx..x1 {
                            let tx = x as i64 + dx;
                            if tx < 0 || tx >= w as i64 {
                                continue;
                            }
                            sum += a.at(x, y).abs_diff(b.at(tx as usize, ty as usize)) as u64;
                            n += 1;
                        }
                    }
                    // Require at least half the block to overlap.
                    if n * 2 < ((x1 - bx) * (y1 - by)) as u64 {
                        continue;
                    }
                    let err = sum as f64 / n as f64;
                    let len = dx * dx + dy * dy;
                    let better = err < best.0 - 1e-12
                        || ((err - best.0).abs() <= 1e-12 && len < best.1 * best.1 + best.2 * best.2);
                    if better {
                        best = (err, dx, dy);
                    }
                }
            }
            for y in by..y1 {
                for x in bx..x1 {
                    let i = y * w + x;
                    flow.dx[i] = best.1 as f32;
                    flow.dy[i] = best.2 as f32;
                }
            }
            bx += block;
        }
        by += block;
    }
    flow
}

/// Frame indices `i` where `MAD(frame[i-1], frame[i])` exceeds `threshold`.
pub fn content_cuts(frames: &[GrayFrame], threshold: f64) -> Result<Vec<usize>> {
    let mut cuts = Vec::new();
    for i in 1..frames.len() {
        if mean_abs_diff(&frames[i - 1], &frames[i])? > threshold {
            cuts.push(i);
        }
    }
    Ok(cuts)
}

/// Per-pixel rounded midpoint.
pub fn linear_midpoint(a: &GrayFrame, b: &GrayFrame) -> GrayFrame {
    GrayFrame::from_fn(a.width, a.height, |x, y| {
        (a.at(x, y) as u16 + b.at(x, y) as u16).div_ceil(2) as u8
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(w: usize, h: usize, x0: usize, y0: usize, s: usize) -> GrayFrame {
        GrayFrame::from_fn(w, h, |x, y| {
            if x >= x0 && x < x0 + s && y >= y0 && y < y0 + s {
                220
            } else {
                ((x * 7 + y * 13) % 40) as u8
            }
        })
    }

    #[test]
    fn static_pair_has_zero_flow() {
        let a = square(32, 32, 8, 8, 8);
        let f = block_flow(&a, &a, 8, 4);
        assert!(f.magnitudes().iter().all(|&m| m == 0.0));
    }

    #[test]
    fn translated_texture_is_recovered() {
        let tex = |dx: usize| GrayFrame::from_fn(48, 32, move |x, y| (((x + 100 - dx) * 31 + y * 17) % 251) as u8);
        let f = block_flow(&tex(0), &tex(3), 8, 5);
        // Interior blocks see the full shift of +3 in x.
        assert_eq!(f.at(20, 16), (3.0, 0.0));
    }

    #[test]
    fn cut_detection() {
        let mut frames = vec![GrayFrame::filled(8, 8, 10); 5];
        frames.extend(vec![GrayFrame::filled(8, 8, 200); 5]);
        assert_eq!(content_cuts(&frames, 30.0).unwrap(), vec![5]);
        assert!(content_cuts(&frames[..5], 30.0).unwrap().is_empty());
    }

    #[test]
    fn midpoint_rounds() {
        let m = linear_midpoint(&GrayFrame::filled(2, 2, 10), &GrayFrame::filled(2, 2, 13));
        assert_eq!(m.at(0, 0), 12);
    }
}
