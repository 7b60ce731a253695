use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use image::RgbImage;
use log::warn;
use rayon::prelude::*;

use super::features::{extract_depth, extract_rgb, FeatureMap, Region};
use super::fuse::{fuse, FusionOp};
use super::ncc::ncc_map;
use super::FusionError;
use crate::geometry::BoundingBox;
use crate::ingest::{DepthImage, FrameSource};
use crate::model::{Sequence, TrackerFrameOutput, TrackerRun};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Modality {
    Rgb,
    Depth,
    Rgbd,
}

impl Modality {
    pub fn name(self) -> &'static str {
        match self {
            Modality::Rgb => "rgb-only",
            Modality::Depth => "d-only",
            Modality::Rgbd => "rgbd",
        }
    }

    /// Label used in ranking tables.
    pub fn label(self) -> &'static str {
        match self {
            Modality::Rgb => "RGB",
            Modality::Depth => "D",
            Modality::Rgbd => "RGBD",
        }
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Modality {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rgb-only" | "rgb" => Ok(Modality::Rgb),
            "d-only" | "d" | "depth" => Ok(Modality::Depth),
            "rgbd" => Ok(Modality::Rgbd),
            _ => Err(format!("unknown modality `{s}` (rgb-only, d-only, rgbd)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackerConfig {
    pub fusion: FusionOp,
    pub modality: Modality,
    /// Search window area relative to the target box.
    pub search_scale: f64,
    /// Scores below this keep the previous anchor box.
    pub presence_threshold: f64,
    pub scale_steps: Vec<f64>,
    /// Longest template side in feature cells; larger boxes are subsampled.
    pub max_template_side: usize,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            fusion: FusionOp::Max,
            modality: Modality::Rgbd,
            search_scale: 4.0,
            presence_threshold: 0.5,
            scale_steps: vec![0.95, 1.0, 1.05],
            max_template_side: 32,
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<(), FusionError> {
        let bad = |m: &str| Err(FusionError::BadConfig(m.to_string()));
        if !(self.search_scale >= 1.0 && self.search_scale.is_finite()) {
            return bad("search scale must be >= 1");
        }
        if !(0.0..=1.0).contains(&self.presence_threshold) {
            return bad("presence threshold must lie in [0, 1]");
        }
        if self.scale_steps.is_empty() || self.scale_steps.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return bad("scale steps must be positive");
        }
        if self.max_template_side == 0 {
            return bad("max template side must be positive");
        }
        if let FusionOp::Weighted(w) = &self.fusion {
            if !(w.len() == 1 || w.len() == super::features::CHANNELS) || w.iter().any(|v| !v.is_finite()) {
                return Err(FusionError::BadWeights {
                    expected: super::features::CHANNELS,
                    found: w.len(),
                });
            }
        }
        Ok(())
    }

    /// Default name for runs made with this configuration.
    pub fn run_name(&self) -> String {
        match self.modality {
            Modality::Rgbd => format!("ncc-rgbd-{}", self.fusion.name()),
            m => format!("ncc-{}", m.name()),
        }
    }

    /// Scale steps with 1.0 (or the closest to it) first so that exact ties
    /// keep the current size.
    fn scale_order(&self) -> Vec<f64> {
        let mut s = self.scale_steps.clone();
        s.sort_by(|a, b| a.ln().abs().total_cmp(&b.ln().abs()).then(a.total_cmp(b)));
        s
    }

    fn features(&self, rgb: &RgbImage, depth: &DepthImage, region: &Region) -> Result<FeatureMap, FusionError> {
        match self.modality {
            Modality::Rgb => extract_rgb(rgb, region),
            Modality::Depth => extract_depth(depth, region),
            Modality::Rgbd => fuse(&extract_rgb(rgb, region)?, &extract_depth(depth, region)?, &self.fusion),
        }
    }
}

/// Window of `k·tw x k·th` cells (`k = √scale`) centred on `b`, sampled at
/// the template's cell size, with the template offset inside it.
fn search_region(b: &BoundingBox, tw: usize, th: usize, scale: f64) -> (Region, usize, usize) {
    let k = scale.sqrt();
    let ww = ((k * tw as f64).round() as usize).max(tw);
    let wh = ((k * th as f64).round() as usize).max(th);
    let (px, py) = ((ww - tw) / 2, (wh - th) / 2);
    let (sx, sy) = (b.w / tw as f64, b.h / th as f64);
    let region = Region {
        x0: b.x - px as f64 * sx,
        y0: b.y - py as f64 * sy,
        sx,
        sy,
        width: ww,
        height: wh,
    };
    (region, px, py)
}

fn crop(m: &FeatureMap, x: usize, y: usize, w: usize, h: usize) -> FeatureMap {
    let mut out = FeatureMap::zeros(m.channels, w, h, m.stride);
    for c in 0..m.channels {
        let src = m.plane(c);
        let dst = out.plane_mut(c);
        for row in 0..h {
            let s = (y + row) * m.width + x;
            dst[row * w..(row + 1) * w].copy_from_slice(&src[s..s + w]);
        }
    }
    out
}

/// Reference branch plus the current anchor.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackState {
    pub template: FeatureMap,
    pub last_box: BoundingBox,
    pub search_scale: f64,
    pub scale_steps: Vec<f64>,
    pub presence_threshold: f64,
    /// The initialization box extended past the frame and was clipped.
    pub clipped: bool,
}

/// Template-matching tracker over RGB, depth, or fused features.
#[derive(Debug, Clone, Default)]
pub struct Tracker {
    pub config: TrackerConfig,
}

impl Tracker {
    pub fn new(config: TrackerConfig) -> Result<Self, FusionError> {
        config.validate()?;
        Ok(Self { config })
    }

    pub fn init(&self, rgb: &RgbImage, depth: &DepthImage, bbox: BoundingBox) -> Result<TrackState, FusionError> {
        if bbox.area() <= 0.0 {
            return Err(FusionError::EmptyRegion);
        }
        let clipped_box = bbox
            .clip_to(rgb.width() as f64, rgb.height() as f64)
            .ok_or(FusionError::EmptyRegion)?;
        let clipped = clipped_box != bbox;
        if clipped {
            warn!("initialization box {bbox:?} extends past the frame; using the clipped region");
        }
        let stride = (clipped_box.w.max(clipped_box.h) / self.config.max_template_side as f64)
            .ceil()
            .max(1.0);
        let tw = (clipped_box.w / stride).round().max(1.0) as usize;
        let th = (clipped_box.h / stride).round().max(1.0) as usize;
        // The template is cut from the same window a later search would see,
        // so an unchanged frame reproduces it exactly.
        let (region, px, py) = search_region(&clipped_box, tw, th, self.config.search_scale);
        let window = self.config.features(rgb, depth, &region)?;
        let template = crop(&window, px, py, tw, th);
        Ok(TrackState {
            template,
            last_box: clipped_box,
            search_scale: self.config.search_scale,
            scale_steps: self.config.scale_order(),
            presence_threshold: self.config.presence_threshold,
            clipped,
        })
    }

    /// Locates the target in a new frame; returns the box and a presence
    /// score in [0, 1].
    pub fn step(&self, state: &mut TrackState, rgb: &RgbImage, depth: &DepthImage) -> Result<(BoundingBox, f64), FusionError> {
        let (tw, th) = (state.template.width, state.template.height);
        let mut best: Option<(BoundingBox, f64)> = None;
        for &s in &state.scale_steps {
            let b = state.last_box.scaled_about_center(s);
            let (region, _, _) = search_region(&b, tw, th, state.search_scale);
            let (sx, sy) = (region.sx, region.sy);
            let search = self.config.features(rgb, depth, &region)?;
            let (u, v, peak) = ncc_map(&state.template, &search)?.argmax();
            let cand = BoundingBox {
                x: region.x0 + u as f64 * sx,
                y: region.y0 + v as f64 * sy,
                w: b.w,
                h: b.h,
            };
            if best.is_none_or(|(_, p)| peak > p) {
                best = Some((cand, peak));
            }
        }
        let (bbox, peak) = best.expect("at least one scale step");
        let score = ((peak + 1.0) / 2.0).clamp(0.0, 1.0);
        if score >= state.presence_threshold {
            state.last_box = bbox;
        }
        Ok((bbox, score))
    }

    /// Single pass over a sequence. Frame 0 reports the initialization box
    /// with score 1.
    pub fn run_sequence(&self, seq: &Sequence, frames: &dyn FrameSource) -> Result<Vec<TrackerFrameOutput>, FusionError> {
        let init = seq.init_box();
        let mut state = self.init(&frames.rgb(0)?, &frames.depth(0)?, init)?;
        let mut out = Vec::with_capacity(seq.len());
        out.push(TrackerFrameOutput { bbox: init, score: 1.0 });
        for i in 1..seq.len() {
            let (bbox, score) = self.step(&mut state, &frames.rgb(i)?, &frames.depth(i)?)?;
            out.push(TrackerFrameOutput { bbox, score });
        }
        Ok(out)
    }

    /// Tracks every sequence (in parallel) and records wall-clock speed.
    pub fn run<F: FrameSource>(&self, name: &str, sequences: &[(Sequence, F)]) -> Result<TrackerRun, FusionError> {
        let start = Instant::now();
        let outputs: Vec<(String, Vec<TrackerFrameOutput>)> = sequences
            .par_iter()
            .map(|(seq, frames)| Ok((seq.name.clone(), self.run_sequence(seq, frames)?)))
            .collect::<Result<_, FusionError>>()?;
        let elapsed = start.elapsed().as_secs_f64();
        let total: usize = outputs.iter().map(|(_, o)| o.len()).sum();
        let mut run = TrackerRun::new(name);
        run.sequences = outputs.into_iter().collect();
        run.fps = (elapsed > 0.0).then(|| total as f64 / elapsed);
        Ok(run)
    }
}
