//! Simulated trackers with metrics known in closed form.

use serde::{Deserialize, Serialize};

use super::SynthError;
use crate::geometry::BoundingBox;
use crate::metrics::{MetricsError, MetricsPoint, Protocol};
use crate::model::{Sequence, TrackerFrameOutput, TrackerRun};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimMode {
    /// Copies the ground truth.
    Perfect,
    /// Overlaps every visible truth at exactly this IoU.
    ConstantIou(f64),
    /// Truth shifted right by `rate * t` pixels at frame `t`.
    Drift(f64),
    /// Never notices absence: keeps reporting the last visible box.
    AbsentBlind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimTrackerSpec {
    pub mode: SimMode,
    /// Score on frames with a visible target.
    pub visible_score: f64,
    /// Score on target-absent frames when `always_predict` is set.
    pub absent_score: f64,
    /// Emit a corner box with `absent_score` on absent frames; otherwise an
    /// empty box with score 0.
    pub always_predict: bool,
}

impl SimTrackerSpec {
    pub fn perfect() -> Self {
        Self {
            mode: SimMode::Perfect,
            visible_score: 1.0,
            absent_score: 0.0,
            always_predict: true,
        }
    }

    pub fn constant_iou(alpha: f64, score: f64) -> Self {
        Self {
            mode: SimMode::ConstantIou(alpha),
            visible_score: score,
            absent_score: score,
            always_predict: true,
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !unit(self.visible_score) || !unit(self.absent_score) {
            return Err(SynthError::InvalidSpec("scores must lie in [0, 1]".into()));
        }
        match self.mode {
            SimMode::ConstantIou(a) if !unit(a) => Err(SynthError::InvalidSpec("IoU must lie in [0, 1]".into())),
            SimMode::Drift(r) if !r.is_finite() => Err(SynthError::InvalidSpec("drift rate must be finite".into())),
            _ => Ok(()),
        }
    }

    /// Score and box emitted on an absent frame.
    fn absent_output(&self, size: (f64, f64)) -> TrackerFrameOutput {
        if self.always_predict {
            TrackerFrameOutput {
                bbox: BoundingBox { x: 0.0, y: 0.0, w: size.0, h: size.1 },
                score: self.absent_score,
            }
        } else {
            TrackerFrameOutput {
                bbox: BoundingBox { x: 0.0, y: 0.0, w: 0.0, h: 0.0 },
                score: 0.0,
            }
        }
    }
}

/// Horizontal shift that gives a same-size copy of a `w`-wide box the
/// overlap `alpha`: (w - d) / (w + d) = alpha.
pub fn iou_shift(width: f64, alpha: f64) -> f64 {
    width * (1.0 - alpha) / (1.0 + alpha)
}

/// Outputs for one sequence. Frame 0 echoes the initialization box.
pub fn simulate_tracker(
    spec: &SimTrackerSpec,
    truths: &[Option<BoundingBox>],
) -> Result<Vec<TrackerFrameOutput>, SynthError> {
    spec.validate()?;
    let first = match truths.first() {
        Some(Some(b)) => *b,
        Some(None) => return Err(SynthError::InvalidSpec("frame 0 has no target".into())),
        None => return Err(SynthError::InvalidSpec("no frames".into())),
    };
    let mut last = first;
    let mut out = Vec::with_capacity(truths.len());
    out.push(TrackerFrameOutput { bbox: first, score: 1.0 });
    for (t, truth) in truths.iter().enumerate().skip(1) {
        let o = match truth {
            Some(b) => {
                last = *b;
                let bbox = match spec.mode {
                    SimMode::Perfect | SimMode::AbsentBlind => *b,
                    SimMode::ConstantIou(alpha) => {
                        if b.area() <= 0.0 {
                            if alpha > 0.0 {
                                return Err(SynthError::UnreachableIoU { frame: t, alpha });
                            }
                            *b
                        } else {
                            b.translate(iou_shift(b.w, alpha), 0.0)
                        }
                    }
                    SimMode::Drift(rate) => b.translate(rate * t as f64, 0.0),
                };
                TrackerFrameOutput { bbox, score: spec.visible_score }
            }
            None => match spec.mode {
                SimMode::AbsentBlind => TrackerFrameOutput { bbox: last, score: spec.visible_score },
                _ => spec.absent_output((last.w, last.h)),
            },
        };
        out.push(o);
    }
    Ok(out)
}

/// Runs the simulated tracker over every sequence.
pub fn simulate_run(name: &str, spec: &SimTrackerSpec, sequences: &[Sequence]) -> Result<TrackerRun, SynthError> {
    let mut run = TrackerRun::new(name);
    for s in sequences {
        run.sequences.insert(s.name.clone(), simulate_tracker(spec, &s.targets())?);
    }
    Ok(run)
}

/// Visible and absent evaluated-frame counts of one sequence.
fn counts(truths: &[Option<BoundingBox>]) -> (usize, usize) {
    let visible = truths.iter().skip(1).filter(|t| t.is_some()).count();
    (visible, truths.len().saturating_sub(1) - visible)
}

/// Closed-form best point for `perfect` and `constant-iou` trackers.
///
/// Visible frames all carry overlap `alpha` and score `s_v`; absent frames
/// carry overlap 0 and score `s_a` (or 0 without always-predict). Precision
/// and recall are then piecewise constant with breakpoints at those scores.
pub fn expected_metrics(
    spec: &SimTrackerSpec,
    sequences: &[Vec<Option<BoundingBox>>],
    protocol: Protocol,
) -> Result<MetricsPoint, SynthError> {
    spec.validate()?;
    let alpha = match spec.mode {
        SimMode::Perfect => 1.0,
        SimMode::ConstantIou(a) => a,
        SimMode::Drift(_) | SimMode::AbsentBlind => return Err(SynthError::Unsupported),
    };
    let absent_score = if spec.always_predict { spec.absent_score } else { 0.0 };
    let per_seq: Vec<(usize, usize)> = sequences.iter().map(|s| counts(s)).filter(|&(v, a)| v + a > 0).collect();
    let total_visible: usize = per_seq.iter().map(|c| c.0).sum();
    let total_absent: usize = per_seq.iter().map(|c| c.1).sum();
    if total_visible == 0 {
        return Err(SynthError::Metrics(MetricsError::EmptyEvaluation));
    }

    let mut grid = vec![0.0, spec.visible_score];
    if total_absent > 0 {
        grid.push(absent_score);
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let point = |tau: f64| {
        let gv = spec.visible_score >= tau;
        let ga = absent_score >= tau;
        let gated = |v: usize, a: usize| -> (f64, usize) {
            let mass = if gv { alpha * v as f64 } else { 0.0 };
            let n = if gv { v } else { 0 } + if ga { a } else { 0 };
            (mass, n)
        };
        match protocol {
            Protocol::FrameBased => {
                let (mass, n) = gated(total_visible, total_absent);
                let pr = if n > 0 { mass / n as f64 } else { 0.0 };
                MetricsPoint::new(tau, pr, mass / total_visible as f64)
            }
            Protocol::SequenceBased => {
                let (mut pr_sum, mut re_sum, mut with_visible) = (0.0, 0.0, 0usize);
                for &(v, a) in &per_seq {
                    let (mass, n) = gated(v, a);
                    if n > 0 {
                        pr_sum += mass / n as f64;
                    }
                    if v > 0 {
                        re_sum += mass / v as f64;
                        with_visible += 1;
                    }
                }
                MetricsPoint::new(tau, pr_sum / per_seq.len() as f64, re_sum / with_visible as f64)
            }
        }
    };
    let mut best = point(grid[0]);
    for &tau in &grid[1..] {
        let p = point(tau);
        if p.f > best.f {
            best = p;
        }
    }
    Ok(best)
}
