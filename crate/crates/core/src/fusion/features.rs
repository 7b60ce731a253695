//! Hand-crafted RGB and depth feature maps.

use image::RgbImage;

use super::FusionError;
use crate::ingest::DepthImage;

/// Channel count of both extractors.
pub const CHANNELS: usize = 6;
/// Channels whose standard deviation falls below this are left unscaled.
pub const NORM_EPS: f64 = 1e-6;

/// `channels x height x width` grid, channel-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    pub channels: usize,
    pub width: usize,
    pub height: usize,
    /// Image pixels per feature cell at extraction time.
    pub stride: u32,
    pub data: Vec<f32>,
}

impl FeatureMap {
    pub fn zeros(channels: usize, width: usize, height: usize, stride: u32) -> Self {
        Self {
            channels,
            width,
            height,
            stride,
            data: vec![0.0; channels * width * height],
        }
    }

    pub fn plane(&self, c: usize) -> &[f32] {
        let n = self.width * self.height;
        &self.data[c * n..(c + 1) * n]
    }

    pub fn plane_mut(&mut self, c: usize) -> &mut [f32] {
        let n = self.width * self.height;
        &mut self.data[c * n..(c + 1) * n]
    }

    pub fn at(&self, c: usize, x: usize, y: usize) -> f32 {
        self.data[(c * self.height + y) * self.width + x]
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.channels == other.channels
            && self.width == other.width
            && self.height == other.height
            && self.stride == other.stride
    }

    /// Zero mean, unit variance per channel. Near-constant channels are left
    /// as they are.
    pub fn normalize(&mut self) {
        for c in 0..self.channels {
            normalize_plane(self.plane_mut(c), None);
        }
    }
}

/// Normalizes the entries selected by `mask` (all when `None`); unselected
/// entries are set to 0.
fn normalize_plane(plane: &mut [f32], mask: Option<&[bool]>) {
    let selected = |i: usize| mask.map_or(true, |m| m[i]);
    let (mut n, mut sum, mut sq) = (0usize, 0.0f64, 0.0f64);
    for (i, &v) in plane.iter().enumerate() {
        if selected(i) {
            n += 1;
            sum += v as f64;
            sq += v as f64 * v as f64;
        }
    }
    if n == 0 {
        plane.iter_mut().for_each(|v| *v = 0.0);
        return;
    }
    let mean = sum / n as f64;
    let var = (sq / n as f64 - mean * mean).max(0.0);
    let std = var.sqrt();
    for (i, v) in plane.iter_mut().enumerate() {
        if !selected(i) {
            *v = 0.0;
        } else if std > NORM_EPS {
            *v = ((*v as f64 - mean) / std) as f32;
        }
    }
}

/// A `width x height` sampling grid laid over the image. Cell `(i, j)` samples
/// image position `(x0 + (i + 0.5) * sx, y0 + (j + 0.5) * sy)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub x0: f64,
    pub y0: f64,
    pub sx: f64,
    pub sy: f64,
    pub width: usize,
    pub height: usize,
}

impl Region {
    /// One cell per pixel over integer-aligned `(x, y, w, h)`.
    pub fn pixels(x: i64, y: i64, w: usize, h: usize) -> Self {
        Self {
            x0: x as f64,
            y0: y as f64,
            sx: 1.0,
            sy: 1.0,
            width: w,
            height: h,
        }
    }

    pub fn stride(&self) -> u32 {
        self.sx.max(self.sy).round().max(1.0) as u32
    }

    /// Sample position of cell `(i, j)` in pixel-index coordinates (pixel `k`
    /// is centered on `k`). Indices may run one cell past either edge.
    fn sample_pos(&self, i: isize, j: isize) -> (f64, f64) {
        (
            self.x0 + (i as f64 + 0.5) * self.sx - 0.5,
            self.y0 + (j as f64 + 0.5) * self.sy - 0.5,
        )
    }
}

/// Bilinear taps with border clamping: `(x, y, weight)`.
fn taps(px: f64, py: f64, w: u32, h: u32) -> [(u32, u32, f64); 4] {
    let fx = px.floor();
    let fy = py.floor();
    let (ax, ay) = (px - fx, py - fy);
    let cx = |v: f64| v.clamp(0.0, (w - 1) as f64) as u32;
    let cy = |v: f64| v.clamp(0.0, (h - 1) as f64) as u32;
    let (x0, x1, y0, y1) = (cx(fx), cx(fx + 1.0), cy(fy), cy(fy + 1.0));
    [
        (x0, y0, (1.0 - ax) * (1.0 - ay)),
        (x1, y0, ax * (1.0 - ay)),
        (x0, y1, (1.0 - ax) * ay),
        (x1, y1, ax * ay),
    ]
}

/// Samples the region with a one-cell margin; returns `(w + 2) x (h + 2)`
/// planes.
fn sample_rgb(img: &RgbImage, r: &Region) -> [Vec<f64>; 3] {
    let (mw, mh) = (r.width + 2, r.height + 2);
    let mut out = [vec![0.0; mw * mh], vec![0.0; mw * mh], vec![0.0; mw * mh]];
    for j in 0..mh {
        for i in 0..mw {
            let (px, py) = r.sample_pos(i as isize - 1, j as isize - 1);
            let mut acc = [0.0; 3];
            for (x, y, wt) in taps(px, py, img.width(), img.height()) {
                if wt == 0.0 {
                    continue;
                }
                let p = img.get_pixel(x, y).0;
                for c in 0..3 {
                    acc[c] += wt * p[c] as f64;
                }
            }
            for c in 0..3 {
                out[c][j * mw + i] = acc[c] / 255.0;
            }
        }
    }
    out
}

/// Like [`sample_rgb`] for depth: invalid (zero) pixels are excluded from the
/// interpolation; a sample is valid when valid taps carry more than half the
/// weight.
fn sample_depth(img: &DepthImage, r: &Region) -> (Vec<f64>, Vec<bool>) {
    let (mw, mh) = (r.width + 2, r.height + 2);
    let mut depth = vec![0.0; mw * mh];
    let mut valid = vec![false; mw * mh];
    for j in 0..mh {
        for i in 0..mw {
            let (px, py) = r.sample_pos(i as isize - 1, j as isize - 1);
            let (mut acc, mut wsum) = (0.0, 0.0);
            for (x, y, wt) in taps(px, py, img.width(), img.height()) {
                let d = img.get_pixel(x, y).0[0];
                if d > 0 && wt > 0.0 {
                    acc += wt * d as f64;
                    wsum += wt;
                }
            }
            if wsum > 0.5 {
                depth[j * mw + i] = acc / wsum;
                valid[j * mw + i] = true;
            }
        }
    }
    (depth, valid)
}

fn check_region(r: &Region, img_w: u32, img_h: u32) -> Result<(), FusionError> {
    if r.width == 0 || r.height == 0 || img_w == 0 || img_h == 0 || !(r.sx > 0.0 && r.sy > 0.0) {
        return Err(FusionError::EmptyRegion);
    }
    Ok(())
}

/// Colors, luminance gradient magnitude, and horizontal / vertical luminance
/// gradients, each normalized over the map.
pub fn extract_rgb(img: &RgbImage, region: &Region) -> Result<FeatureMap, FusionError> {
    check_region(region, img.width(), img.height())?;
    let (w, h) = (region.width, region.height);
    let mw = w + 2;
    let planes = sample_rgb(img, region);
    let lum: Vec<f64> = (0..planes[0].len())
        .map(|k| 0.299 * planes[0][k] + 0.587 * planes[1][k] + 0.114 * planes[2][k])
        .collect();
    let mut map = FeatureMap::zeros(CHANNELS, w, h, region.stride());
    let n = w * h;
    for y in 0..h {
        for x in 0..w {
            let m = (y + 1) * mw + (x + 1);
            let o = y * w + x;
            let gx = 0.5 * (lum[m + 1] - lum[m - 1]);
            let gy = 0.5 * (lum[m + mw] - lum[m - mw]);
            map.data[o] = planes[0][m] as f32;
            map.data[n + o] = planes[1][m] as f32;
            map.data[2 * n + o] = planes[2][m] as f32;
            map.data[3 * n + o] = (gx * gx + gy * gy).sqrt() as f32;
            map.data[4 * n + o] = gx as f32;
            map.data[5 * n + o] = gy as f32;
        }
    }
    map.normalize();
    Ok(map)
}

/// Depth (scaled to tens of meters), inverse depth (1/m), depth gradient
/// magnitude, horizontal / vertical depth gradients (mm per cell), and a
/// validity mask. Invalid cells are 0 in every channel; the other cells are
/// normalized over the valid part of the map.
pub fn extract_depth(img: &DepthImage, region: &Region) -> Result<FeatureMap, FusionError> {
    check_region(region, img.width(), img.height())?;
    let (w, h) = (region.width, region.height);
    let mw = w + 2;
    let (depth, valid) = sample_depth(img, region);
    let mut map = FeatureMap::zeros(CHANNELS, w, h, region.stride());
    let n = w * h;
    let mut mask = vec![false; n];
    for y in 0..h {
        for x in 0..w {
            let m = (y + 1) * mw + (x + 1);
            let o = y * w + x;
            if !valid[m] {
                continue;
            }
            mask[o] = true;
            let d = depth[m];
            let diff = |a: usize, b: usize| {
                if valid[a] && valid[b] {
                    0.5 * (depth[a] - depth[b])
                } else {
                    0.0
                }
            };
            let gx = diff(m + 1, m - 1);
            let gy = diff(m + mw, m - mw);
            map.data[o] = (d / 10_000.0) as f32;
            map.data[n + o] = (1000.0 / d) as f32;
            map.data[2 * n + o] = (gx * gx + gy * gy).sqrt() as f32;
            map.data[3 * n + o] = gx as f32;
            map.data[4 * n + o] = gy as f32;
            map.data[5 * n + o] = 1.0;
        }
    }
    for c in 0..CHANNELS - 1 {
        normalize_plane(map.plane_mut(c), Some(&mask));
    }
    Ok(map)
}
