//! Seeded RGBD scene rendering.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use image::{Luma, Rgb, RgbImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::SynthError;
use crate::geometry::BoundingBox;
use crate::ingest::{DepthImage, MemoryFrames};
use crate::model::{Attribute, AttributeSet, FrameTruth, Sequence};

/// Illumination below this tags a frame as a dark scene.
pub const DARK_SCENE_ILLUMINATION: f64 = 0.4;
/// Camouflage above this tags a frame as background clutter.
pub const CLUTTER_CAMOUFLAGE: f64 = 0.7;
/// Depth speed (mm/frame) above which a frame is tagged depth change.
pub const DEPTH_CHANGE_MM_PER_FRAME: f64 = 15.0;
/// Brightness of the inner patch of the target relative to its body.
const INNER_SHADE: f64 = 0.55;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Rectangle,
    Disc,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub width: u32,
    pub height: u32,
    pub shape: Shape,
    pub color: [u8; 3],
}

/// `start + velocity * t + amplitude * sin(2 pi t / period + phase)`;
/// a zero period disables the oscillation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AxisPath {
    pub start: f64,
    pub velocity: f64,
    pub amplitude: f64,
    pub period: f64,
    pub phase: f64,
}

impl AxisPath {
    pub fn fixed(v: f64) -> Self {
        Self {
            start: v,
            ..Default::default()
        }
    }

    pub fn at(&self, t: f64) -> f64 {
        let osc = if self.period > 0.0 {
            self.amplitude * (TAU * t / self.period + self.phase).sin()
        } else {
            0.0
        };
        self.start + self.velocity * t + osc
    }
}

/// Target center in pixels (`x`, `y`) and target depth in mm (`z`).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MotionPath {
    pub x: AxisPath,
    pub y: AxisPath,
    pub z: AxisPath,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DistractorSpec {
    pub count: u32,
    /// 0 renders distractors flat on the background depth, 1 at the
    /// target's initial depth.
    pub depth_contrast: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Gaussian sigma on each color channel (0-255 units).
    pub rgb: f64,
    /// Gaussian sigma on depth (mm).
    pub depth: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BackgroundSpec {
    /// Colors at the left and right edges; linearly blended across.
    pub left: [u8; 3],
    pub right: [u8; 3],
    /// Amplitude of the low-frequency texture added to the blend.
    pub texture: f64,
    pub depth_mm: f64,
}

impl Default for BackgroundSpec {
    fn default() -> Self {
        Self {
            left: [70, 90, 120],
            right: [150, 120, 80],
            texture: 10.0,
            depth_mm: 3000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub frames: usize,
    pub resolution: (u32, u32),
    pub target: TargetSpec,
    pub motion: MotionPath,
    /// Half-open `[start, end)` frame intervals where the target is visible.
    pub visibility: Vec<(usize, usize)>,
    pub distractors: DistractorSpec,
    /// 0 keeps the target color, 1 replaces it with the mean background color.
    pub camouflage: f64,
    /// 0 puts the target on the background depth, 1 on its path depth.
    pub depth_contrast: f64,
    /// Global brightness multiplier in (0, 1].
    pub illumination: f64,
    pub noise: NoiseSpec,
    pub background: BackgroundSpec,
    pub seed: u64,
}

impl SceneSpec {
    pub fn is_visible(&self, t: usize) -> bool {
        self.visibility.iter().any(|&(s, e)| s <= t && t < e)
    }

    /// True target box at frame `t`, snapped to whole pixels.
    pub fn target_box(&self, t: usize) -> BoundingBox {
        let (w, h) = (self.target.width as f64, self.target.height as f64);
        let x = (self.motion.x.at(t as f64) - 0.5 * w).round();
        let y = (self.motion.y.at(t as f64) - 0.5 * h).round();
        BoundingBox { x, y, w, h }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::InvalidSpec(m.to_string()));
        let (rw, rh) = self.resolution;
        if self.frames == 0 {
            return bad("frame count must be positive");
        }
        if rw == 0 || rh == 0 {
            return bad("resolution must be positive");
        }
        if self.target.width == 0 || self.target.height == 0 {
            return bad("target size must be positive");
        }
        if self.target.width > rw || self.target.height > rh {
            return bad("target larger than the image");
        }
        if self.visibility.iter().any(|&(s, e)| s >= e) {
            return bad("visibility intervals must be non-empty [start, end)");
        }
        if !self.is_visible(0) {
            return bad("frame 0 must lie inside a visible interval");
        }
        for (name, v) in [
            ("camouflage", self.camouflage),
            ("depth contrast", self.depth_contrast),
            ("distractor depth contrast", self.distractors.depth_contrast),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return bad(&format!("{name} must lie in [0, 1]"));
            }
        }
        if !(self.illumination > 0.0 && self.illumination <= 1.0) {
            return bad("illumination must lie in (0, 1]");
        }
        if !(self.noise.rgb >= 0.0 && self.noise.depth >= 0.0) {
            return bad("noise sigmas must be non-negative");
        }
        if !(self.background.depth_mm >= 1.0 && self.background.depth_mm <= 60000.0) {
            return bad("background depth must lie in [1, 60000] mm");
        }
        for t in 0..self.frames {
            if !self.target_box(t).within(rw as f64, rh as f64) {
                return bad(&format!("target leaves the image at frame {t}"));
            }
            let z = self.motion.z.at(t as f64);
            if !(1.0..=60000.0).contains(&z) {
                return bad(&format!("target depth {z} mm out of range at frame {t}"));
            }
        }
        Ok(())
    }

    /// Attribute tags implied by the generating conditions of frame `t`.
    /// Annotations alone, without rendering any pixels.
    pub fn ground_truth(&self, name: &str) -> Result<Sequence, SynthError> {
        self.validate()?;
        let truths = (0..self.frames)
            .map(|t| FrameTruth {
                target: self.is_visible(t).then(|| self.target_box(t)),
                attributes: self.frame_attributes(t),
            })
            .collect();
        Sequence::new(name, truths, self.resolution, 30.0).map_err(|e| SynthError::InvalidSpec(e.to_string()))
    }

    pub fn frame_attributes(&self, t: usize) -> AttributeSet {
        let mut set = AttributeSet::empty();
        if !self.is_visible(t) {
            set.insert(Attribute::FO);
        }
        if self.illumination < DARK_SCENE_ILLUMINATION {
            set.insert(Attribute::DS);
        }
        if self.distractors.count > 0 {
            set.insert(Attribute::SO);
        }
        let dz = self.motion.z.at(t as f64 + 1.0) - self.motion.z.at(t as f64);
        if dz.abs() > DEPTH_CHANGE_MM_PER_FRAME {
            set.insert(Attribute::DC);
        }
        if self.camouflage > CLUTTER_CAMOUFLAGE {
            set.insert(Attribute::BC);
        }
        if set.is_empty() {
            set.insert(Attribute::NaN);
        }
        set
    }

    fn background_mean(&self) -> [f64; 3] {
        let (l, r) = (self.background.left, self.background.right);
        [0, 1, 2].map(|c| 0.5 * (l[c] as f64 + r[c] as f64))
    }

    /// Target body and inner-patch colors after camouflage.
    pub fn target_colors(&self) -> ([f64; 3], [f64; 3]) {
        let bg = self.background_mean();
        let c = self.camouflage;
        let body = [0, 1, 2].map(|i| lerp(self.target.color[i] as f64, bg[i], c));
        let inner = [0, 1, 2].map(|i| lerp(self.target.color[i] as f64 * INNER_SHADE, bg[i], c));
        (body, inner)
    }

    /// Rendered target depth at frame `t` before noise.
    pub fn target_depth(&self, t: usize) -> f64 {
        lerp(self.background.depth_mm, self.motion.z.at(t as f64), self.depth_contrast)
    }
}

fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + (b - a) * t
}

/// Everything `generate_sequence` produces.
#[derive(Debug, Clone)]
pub struct SyntheticSequence {
    pub sequence: Sequence,
    pub frames: MemoryFrames,
    pub tags: BTreeMap<Attribute, Vec<bool>>,
}

/// Which pixels a shape covers inside its box (pixel-center test).
fn covers(shape: Shape, b: &BoundingBox, px: u32, py: u32, shrink: f64) -> bool {
    let (cx, cy) = b.center();
    let (hw, hh) = (0.5 * b.w * shrink, 0.5 * b.h * shrink);
    let (dx, dy) = (px as f64 + 0.5 - cx, py as f64 + 0.5 - cy);
    match shape {
        Shape::Rectangle => dx.abs() < hw && dy.abs() < hh,
        Shape::Disc => (dx / hw).powi(2) + (dy / hh).powi(2) <= 1.0,
    }
}

struct Layer {
    bbox: BoundingBox,
    body: [f64; 3],
    inner: [f64; 3],
    depth: f64,
}

fn paint(spec: &SceneSpec, color: &mut [[f64; 3]], depth: &mut [f64], layer: &Layer) {
    let (w, h) = spec.resolution;
    let b = &layer.bbox;
    let x0 = b.x.floor().max(0.0) as u32;
    let y0 = b.y.floor().max(0.0) as u32;
    let x1 = (b.right().ceil() as u32).min(w);
    let y1 = (b.bottom().ceil() as u32).min(h);
    for py in y0..y1 {
        for px in x0..x1 {
            if !covers(spec.target.shape, b, px, py, 1.0) {
                continue;
            }
            let i = (py * w + px) as usize;
            color[i] = if covers(spec.target.shape, b, px, py, 0.5) {
                layer.inner
            } else {
                layer.body
            };
            depth[i] = layer.depth;
        }
    }
}

/// Renders `spec` into frames, ground truth, and attribute tags. Output is a
/// pure function of the spec (including its seed).
pub fn generate_sequence(name: &str, spec: &SceneSpec) -> Result<SyntheticSequence, SynthError> {
    spec.validate()?;
    let (w, h) = spec.resolution;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let (body, inner) = spec.target_colors();
    let distractors: Vec<Layer> = (0..spec.distractors.count)
        .map(|_| {
            let tw = spec.target.width as f64;
            let th = spec.target.height as f64;
            let x = rng.gen_range(0..=(w - spec.target.width)) as f64;
            let y = rng.gen_range(0..=(h - spec.target.height)) as f64;
            Layer {
                bbox: BoundingBox { x, y, w: tw, h: th },
                body,
                inner,
                depth: lerp(spec.background.depth_mm, spec.motion.z.at(0.0), spec.distractors.depth_contrast),
            }
        })
        .collect();

    let bg = &spec.background;
    let mut base_color = vec![[0.0; 3]; (w * h) as usize];
    for py in 0..h {
        for px in 0..w {
            let u = if w > 1 { px as f64 / (w - 1) as f64 } else { 0.0 };
            let tex = bg.texture * (TAU * px as f64 / 37.0).sin() * (TAU * py as f64 / 29.0).cos();
            base_color[(py * w + px) as usize] = [0, 1, 2].map(|c| lerp(bg.left[c] as f64, bg.right[c] as f64, u) + tex);
        }
    }

    let rgb_noise = Normal::new(0.0, spec.noise.rgb).map_err(|e| SynthError::InvalidSpec(e.to_string()))?;
    let depth_noise = Normal::new(0.0, spec.noise.depth).map_err(|e| SynthError::InvalidSpec(e.to_string()))?;

    let mut frames = MemoryFrames::default();
    for t in 0..spec.frames {
        let mut color = base_color.clone();
        let mut depth = vec![bg.depth_mm; (w * h) as usize];
        for d in &distractors {
            paint(spec, &mut color, &mut depth, d);
        }
        let visible = spec.is_visible(t);
        let bbox = spec.target_box(t);
        if visible {
            let layer = Layer {
                bbox,
                body,
                inner,
                depth: spec.target_depth(t),
            };
            paint(spec, &mut color, &mut depth, &layer);
        }

        let mut rgb = RgbImage::new(w, h);
        for (i, px) in rgb.pixels_mut().enumerate() {
            let c = color[i];
            *px = Rgb([0, 1, 2].map(|k| {
                let v = c[k] * spec.illumination + rgb_noise.sample(&mut rng);
                v.round().clamp(0.0, 255.0) as u8
            }));
        }
        let mut dimg = DepthImage::new(w, h);
        for (i, px) in dimg.pixels_mut().enumerate() {
            let v = depth[i] + depth_noise.sample(&mut rng);
            *px = Luma([v.round().clamp(1.0, 65535.0) as u16]);
        }
        frames.rgb.push(rgb);
        frames.depth.push(dimg);
    }

    let sequence = spec.ground_truth(name)?;
    let mut tags = BTreeMap::new();
    for a in Attribute::TAGGED {
        let flags: Vec<bool> = sequence.frames.iter().map(|f| f.attributes.contains(a)).collect();
        if flags.iter().any(|&f| f) {
            tags.insert(a, flags);
        }
    }
    Ok(SyntheticSequence { sequence, frames, tags })
}
