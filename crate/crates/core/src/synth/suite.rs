//! Preset families of scenes used as tracker testbeds.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::scene::{AxisPath, BackgroundSpec, DistractorSpec, MotionPath, NoiseSpec, SceneSpec, Shape, TargetSpec};

pub const DEFAULT_RESOLUTION: (u32, u32) = (128, 96);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteKind {
    /// Distinct target color, moderate depth separation, occasional distractors.
    Standard,
    /// Target color close to the background, look-alike distractors painted
    /// flat on the background; only depth separates the target.
    Camouflage,
    /// Target on the background depth plane; only color separates it.
    DepthFlat,
}

impl SuiteKind {
    pub fn name(self) -> &'static str {
        match self {
            SuiteKind::Standard => "standard",
            SuiteKind::Camouflage => "camouflage",
            SuiteKind::DepthFlat => "depth-flat",
        }
    }
}

impl fmt::Display for SuiteKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SuiteKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "standard" => Ok(SuiteKind::Standard),
            "camouflage" => Ok(SuiteKind::Camouflage),
            "depth-flat" => Ok(SuiteKind::DepthFlat),
            _ => Err(format!("unknown suite `{s}` (standard, camouflage, depth-flat)")),
        }
    }
}

const TARGET_COLORS: [[u8; 3]; 4] = [[220, 40, 40], [40, 200, 60], [240, 220, 40], [200, 60, 220]];

/// Axis path oscillating around a center chosen so the whole path stays at
/// least `margin` pixels inside `[half, extent - half]`.
fn oscillation(rng: &mut ChaCha8Rng, extent: f64, half: f64, amp_max: f64) -> AxisPath {
    let amplitude = rng.gen_range(0.3 * amp_max..=amp_max);
    let margin = 2.0;
    let lo = half + amplitude + margin;
    let hi = extent - half - amplitude - margin;
    let start = if hi > lo { rng.gen_range(lo..=hi) } else { 0.5 * extent };
    AxisPath {
        start,
        velocity: 0.0,
        amplitude,
        period: rng.gen_range(140.0..260.0),
        phase: rng.gen_range(0.0..std::f64::consts::TAU),
    }
}

/// Visible everywhere except one gap covering roughly a tenth of the frames.
fn visibility(rng: &mut ChaCha8Rng, frames: usize) -> Vec<(usize, usize)> {
    if frames < 20 {
        return vec![(0, frames)];
    }
    let gap = (frames / 10).max(1);
    let start = rng.gen_range(frames / 3..(2 * frames / 3));
    vec![(0, start), ((start + gap).min(frames), frames)]
        .into_iter()
        .filter(|(s, e)| s < e)
        .collect()
}

/// `count` scene specs named `<suite>-NNN`, deterministic in `seed`.
pub fn suite_specs(kind: SuiteKind, count: usize, frames: usize, seed: u64) -> Vec<(String, SceneSpec)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((kind as u64 + 1) << 56));
    let (w, h) = DEFAULT_RESOLUTION;
    (0..count)
        .map(|i| {
            let tw: u32 = rng.gen_range(14..=20);
            let th: u32 = rng.gen_range(12..=16);
            let shape = if rng.gen_bool(0.5) { Shape::Rectangle } else { Shape::Disc };
            let color = TARGET_COLORS[rng.gen_range(0..TARGET_COLORS.len())];
            let x = oscillation(&mut rng, w as f64, tw as f64 / 2.0, 28.0);
            let y = oscillation(&mut rng, h as f64, th as f64 / 2.0, 16.0);
            let z = AxisPath {
                start: rng.gen_range(1200.0..1800.0),
                velocity: 0.0,
                amplitude: rng.gen_range(0.0..500.0),
                period: rng.gen_range(120.0..240.0),
                phase: rng.gen_range(0.0..std::f64::consts::TAU),
            };
            let vis = visibility(&mut rng, frames);
            let (camouflage, depth_contrast, distractors, illumination) = match kind {
                SuiteKind::Standard => (
                    rng.gen_range(0.0..0.3),
                    0.6,
                    DistractorSpec {
                        count: rng.gen_range(0..=1),
                        depth_contrast: 0.3,
                    },
                    rng.gen_range(0.3..1.0),
                ),
                SuiteKind::Camouflage => (
                    rng.gen_range(0.85..0.95),
                    0.8,
                    DistractorSpec {
                        count: rng.gen_range(2..=3),
                        depth_contrast: 0.0,
                    },
                    rng.gen_range(0.6..1.0),
                ),
                SuiteKind::DepthFlat => (
                    0.0,
                    0.0,
                    DistractorSpec::default(),
                    rng.gen_range(0.6..1.0),
                ),
            };
            let spec = SceneSpec {
                frames,
                resolution: (w, h),
                target: TargetSpec {
                    width: tw,
                    height: th,
                    shape,
                    color,
                },
                motion: MotionPath { x, y, z },
                visibility: vis,
                distractors,
                camouflage,
                depth_contrast,
                illumination,
                noise: NoiseSpec { rgb: 3.0, depth: 8.0 },
                background: BackgroundSpec::default(),
                seed: rng.gen(),
            };
            (format!("{}-{:03}", kind.name(), i), spec)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_produce_valid_specs() {
        for kind in [SuiteKind::Standard, SuiteKind::Camouflage, SuiteKind::DepthFlat] {
            for (name, spec) in suite_specs(kind, 12, 300, 99) {
                spec.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
            }
        }
    }

    #[test]
    fn suites_are_seeded() {
        let a = suite_specs(SuiteKind::Camouflage, 3, 50, 1);
        assert_eq!(a, suite_specs(SuiteKind::Camouflage, 3, 50, 1));
        assert_ne!(a, suite_specs(SuiteKind::Camouflage, 3, 50, 2));
        assert_eq!(a[2].0, "camouflage-002");
    }
}
