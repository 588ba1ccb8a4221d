//! 8-bit grayscale frames and the pixel-level operations the temporal
//! metrics need: absolute difference, SSIM, flow warping and masks.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One luma plane, row-major.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrayFrame {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

impl core::fmt::Debug for GrayFrame {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "GrayFrame({}x{})", self.width, self.height)
    }
}

impl GrayFrame {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::Input(alloc::format!(
                "frame {width}x{height} needs {} bytes, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(GrayFrame {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        GrayFrame {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> u8) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        GrayFrame {
            width,
            height,
            data,
        }
    }

    pub fn at(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn same_shape(&self, other: &GrayFrame) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn mean(&self) -> f64 {
        if self.data.is_empty() {
            return 0.0;
        }
        self.data.iter().map(|&v| v as f64).sum::<f64>() / self.data.len() as f64
    }

    /// Bilinear sample; `None` outside the image.
    pub fn sample(&self, x: f64, y: f64) -> Option<f64> {
        if x < 0.0 || y < 0.0 || x > (self.width - 1) as f64 || y > (self.height - 1) as f64 {
            return None;
        }
        let x0 = libm::floor(x) as usize;
        let y0 = libm::floor(y) as usize;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let fx = x - x0 as f64;
        let fy = y - y0 as f64;
        let p = |xx: usize, yy: usize| self.at(xx, yy) as f64;
        let top = p(x0, y0) * (1.0 - fx) + p(x1, y0) * fx;
        let bottom = p(x0, y1) * (1.0 - fx) + p(x1, y1) * fx;
        Some(top * (1.0 - fy) + bottom * fy)
    }
}

fn check_shapes(a: &GrayFrame, b: &GrayFrame) -> Result<()> {
    if a.same_shape(b) {
        Ok(())
    } else {
        Err(Error::Input(alloc::format!(
            "frame shapes differ: {}x{} vs {}x{}",
            a.width,
            a.height,
            b.width,
            b.height
        )))
    }
}

/// Mean absolute pixel difference on the 0–255 scale.
pub fn mean_abs_diff(a: &GrayFrame, b: &GrayFrame) -> Result<f64> {
    check_shapes(a, b)?;
    if a.data.is_empty() {
        return Ok(0.0);
    }
    let sum: u64 = a
        .data
        .iter()
        .zip(&b.data)
        .map(|(&x, &y)| (x as i32 - y as i32).unsigned_abs() as u64)
        .sum();
    Ok(sum as f64 / a.data.len() as f64)
}

/// Mean SSIM over non-overlapping 8x8 windows (partial windows at the
/// border included), standard constants for 8-bit data.
pub fn ssim(a: &GrayFrame, b: &GrayFrame) -> Result<f64> {
    check_shapes(a, b)?;
    const WIN: usize = 8;
    let c1 = (0.01f64 * 255.0) * (0.01 * 255.0);
    let c2 = (0.03f64 * 255.0) * (0.03 * 255.0);
    let mut total = 0.0;
    let mut windows = 0usize;
    let mut y0 = 0;
    while y0 < a.height {
        let mut x0 = 0;
        while x0 < a.width {
            let (mut sa, mut sb, mut saa, mut sbb, mut sab, mut n) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
            for y in y0..(y0 + WIN).min(a.height) {
                for x in x0..(x0 + WIN).min(a.width) {
                    let va = a.at(x, y) as f64;
                    let vb = b.at(x, y) as f64;
                    sa += va;
                    sb += vb;
                    saa += va * va;
                    sbb += vb * vb;
                    sab += va * vb;
                    n += 1.0;
                }
            }
            let ma = sa / n;
            let mb = sb / n;
            let va = saa / n - ma * ma;
            let vb = sbb / n - mb * mb;
            let cov = sab / n - ma * mb;
            total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2))
                / ((ma * ma + mb * mb + c1) * (va + vb + c2));
            windows += 1;
            x0 += WIN;
        }
        y0 += WIN;
    }
    Ok(if windows == 0 { 1.0 } else { total / windows as f64 })
}

/// Dense displacement field over the pixels of a source frame:
/// `source(p) ≈ target(p + flow(p))`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowField {
    pub width: usize,
    pub height: usize,
    pub dx: Vec<f32>,
    pub dy: Vec<f32>,
}

impl core::fmt::Debug for FlowField {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "FlowField({}x{})", self.width, self.height)
    }
}

impl FlowField {
    pub fn uniform(width: usize, height: usize, dx: f32, dy: f32) -> Self {
        FlowField {
            width,
            height,
            dx: vec![dx; width * height],
            dy: vec![dy; width * height],
        }
    }

    pub fn is_valid(&self) -> bool {
        self.dx.len() == self.width * self.height && self.dy.len() == self.dx.len()
    }

    pub fn at(&self, x: usize, y: usize) -> (f64, f64) {
        let i = y * self.width + x;
        (self.dx[i] as f64, self.dy[i] as f64)
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.dx
            .iter()
            .zip(&self.dy)
            .map(|(&x, &y)| libm::sqrt((x as f64) * (x as f64) + (y as f64) * (y as f64)))
            .collect()
    }

    pub fn mean_vector(&self) -> (f64, f64) {
        let n = self.dx.len().max(1) as f64;
        (
            self.dx.iter().map(|&v| v as f64).sum::<f64>() / n,
            self.dy.iter().map(|&v| v as f64).sum::<f64>() / n,
        )
    }
}

/// Mean of the largest `fraction` of flow magnitudes.
pub fn top_fraction_mean(magnitudes: &[f64], fraction: f64) -> f64 {
    if magnitudes.is_empty() {
        return 0.0;
    }
    let mut m = magnitudes.to_vec();
    m.sort_by(|a, b| b.total_cmp(a));
    let take = ((crate::math::ceil_tolerant(m.len() as f64 * fraction)) as usize).clamp(1, m.len());
    m[..take].iter().sum::<f64>() / take as f64
}

/// Warped reconstruction of `target` from `source`:
/// `warped(q) = source(q + flow(q))` where `flow` is defined over the target
/// grid and maps into the source. Returns the per-pixel values and a
/// validity mask (sample landed inside the source and `occlusion` allows it).
pub fn warp_backward(
    source: &GrayFrame,
    flow: &FlowField,
    occlusion: Option<&[bool]>,
) -> Result<(Vec<f64>, Vec<bool>)> {
    if flow.width != source.width || flow.height != source.height || !flow.is_valid() {
        return Err(Error::Input("flow field shape does not match frame".into()));
    }
    let n = source.width * source.height;
    let mut values = vec![0.0; n];
    let mut valid = vec![false; n];
    for y in 0..source.height {
        for x in 0..source.width {
            let i = y * source.width + x;
            if occlusion.is_some_and(|o| o[i]) {
                continue;
            }
            let (dx, dy) = flow.at(x, y);
            if let Some(v) = source.sample(x as f64 + dx, y as f64 + dy) {
                values[i] = v;
                valid[i] = true;
            }
        }
    }
    Ok((values, valid))
}

/// Forward-backward consistency check. `forward` maps frame A into B,
/// `backward` maps B into A; a pixel of A is occluded when the round trip
/// misses by more than `0.01·(|f|²+|b|²) + 0.5` pixels².
pub fn occlusion_mask(forward: &FlowField, backward: &FlowField) -> Vec<bool> {
    let mut out = vec![false; forward.width * forward.height];
    for y in 0..forward.height {
        for x in 0..forward.width {
            let (fx, fy) = forward.at(x, y);
            let tx = libm::round(x as f64 + fx);
            let ty = libm::round(y as f64 + fy);
            let i = y * forward.width + x;
            if tx < 0.0 || ty < 0.0 || tx >= backward.width as f64 || ty >= backward.height as f64 {
                out[i] = true;
                continue;
            }
            let (bx, by) = backward.at(tx as usize, ty as usize);
            let ex = fx + bx;
            let ey = fy + by;
            let err = ex * ex + ey * ey;
            let mag = fx * fx + fy * fy + bx * bx + by * by;
            out[i] = err > 0.01 * mag + 0.5;
        }
    }
    out
}

/// Binary mask over a frame.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mask {
    pub width: usize,
    pub height: usize,
    pub bits: Vec<bool>,
}

impl core::fmt::Debug for Mask {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "Mask({}x{}, {} set)", self.width, self.height, self.count())
    }
}

impl Mask {
    pub fn empty(width: usize, height: usize) -> Self {
        Mask {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn coverage(&self) -> f64 {
        if self.bits.is_empty() {
            0.0
        } else {
            self.count() as f64 / self.bits.len() as f64
        }
    }

    pub fn union_with(&mut self, other: &Mask) {
        for (a, &b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
    }

    /// Square dilation by `radius` pixels.
    pub fn dilate(&self, radius: usize) -> Mask {
        if radius == 0 {
            return self.clone();
        }
        let mut out = Mask::empty(self.width, self.height);
        let r = radius as isize;
        for y in 0..self.height as isize {
            for x in 0..self.width as isize {
                if !self.bits[(y as usize) * self.width + x as usize] {
                    continue;
                }
                for yy in (y - r).max(0)..=(y + r).min(self.height as isize - 1) {
                    for xx in (x - r).max(0)..=(x + r).min(self.width as isize - 1) {
                        out.bits[yy as usize * self.width + xx as usize] = true;
                    }
                }
            }
        }
        out
    }

    pub fn iou(&self, other: &Mask) -> f64 {
        let mut inter = 0usize;
        let mut union = 0usize;
        for (&a, &b) in self.bits.iter().zip(&other.bits) {
            inter += (a && b) as usize;
            union += (a || b) as usize;
        }
        if union == 0 {
            1.0
        } else {
            inter as f64 / union as f64
        }
    }

    /// Bounding box `(x0, y0, x1, y1)` exclusive of the upper corner.
    pub fn bbox(&self) -> Option<(usize, usize, usize, usize)> {
        let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
        for y in 0..self.height {
            for x in 0..self.width {
                if self.bits[y * self.width + x] {
                    x0 = x0.min(x);
                    y0 = y0.min(y);
                    x1 = x1.max(x + 1);
                    y1 = y1.max(y + 1);
                }
            }
        }
        (x0 != usize::MAX).then_some((x0, y0, x1, y1))
    }
}

/// Masked region of `frame` cropped to the mask's bounding box; pixels
/// outside the mask are zeroed.
pub fn masked_crop(frame: &GrayFrame, mask: &Mask) -> Option<GrayFrame> {
    let (x0, y0, x1, y1) = mask.bbox()?;
    Some(GrayFrame::from_fn(x1 - x0, y1 - y0, |x, y| {
        let (sx, sy) = (x + x0, y + y0);
        if mask.bits[sy * frame.width + sx] {
            frame.at(sx, sy)
        } else {
            0
        }
    }))
}

/// Frame with every masked pixel zeroed.
pub fn remove_masked(frame: &GrayFrame, mask: &Mask) -> GrayFrame {
    GrayFrame {
        width: frame.width,
        height: frame.height,
        data: frame
            .data
            .iter()
            .zip(&mask.bits)
            .map(|(&v, &m)| if m { 0 } else { v })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mad_of_uniform_offset() {
        let a = GrayFrame::filled(4, 4, 100);
        let b = GrayFrame::filled(4, 4, 110);
        assert_eq!(mean_abs_diff(&a, &b).unwrap(), 10.0);
        assert!(mean_abs_diff(&a, &GrayFrame::filled(3, 4, 0)).is_err());
    }

    #[test]
    fn ssim_identity_and_drop() {
        let a = GrayFrame::from_fn(16, 16, |x, y| ((x * 13 + y * 7) % 256) as u8);
        assert!((ssim(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        let b = GrayFrame::from_fn(16, 16, |x, y| ((x * 5 + y * 31 + 90) % 256) as u8);
        assert!(ssim(&a, &b).unwrap() < 0.5);
    }

    #[test]
    fn warp_with_exact_translation() {
        let src = GrayFrame::from_fn(12, 12, |x, y| (x * 10 + y) as u8);
        // target(q) = src(q + (2, 0))
        let flow = FlowField::uniform(12, 12, 2.0, 0.0);
        let (vals, valid) = warp_backward(&src, &flow, None).unwrap();
        assert_eq!(valid.iter().filter(|&&v| v).count(), 10 * 12);
        assert_eq!(vals[0], src.at(2, 0) as f64);
        assert!(!valid[11]);
    }

    #[test]
    fn occlusion_consistent_flows() {
        let f = FlowField::uniform(8, 8, 1.0, 0.0);
        let b = FlowField::uniform(8, 8, -1.0, 0.0);
        let occ = occlusion_mask(&f, &b);
        // Rightmost column leaves the frame.
        assert_eq!(occ.iter().filter(|&&o| o).count(), 8);
    }

    #[test]
    fn mask_ops() {
        let mut m = Mask::empty(5, 5);
        m.bits[12] = true;
        assert_eq!(m.dilate(1).count(), 9);
        assert_eq!(m.bbox(), Some((2, 2, 3, 3)));
        assert_eq!(Mask::empty(2, 2).bbox(), None);
        let frame = GrayFrame::filled(5, 5, 200);
        let crop = masked_crop(&frame, &m.dilate(1)).unwrap();
        assert_eq!((crop.width, crop.height), (3, 3));
        assert_eq!(remove_masked(&frame, &m).data[12], 0);
        assert_eq!(m.iou(&m.dilate(1)), 1.0 / 9.0);
    }

    #[test]
    fn top_fraction() {
        let m: Vec<f64> = (1..=20).map(|v| v as f64).collect();
        assert_eq!(top_fraction_mean(&m, 0.05), 20.0);
        assert_eq!(top_fraction_mean(&m, 0.1), 19.5);
    }
}
