//! Long-term tracking precision, recall, and F-score.
//!
//! Predictions are gated by their confidence: at threshold `tau` a frame
//! counts as predicted iff `score >= tau`. Precision averages the overlap
//! over predicted frames, recall averages the gated overlap over frames with
//! a visible target. Curves are sampled at every observed score plus 0, which
//! hits every value the step functions take.
//!
//! All sums are accumulated in one canonical record order (score descending,
//! then sequence name, then frame index) and sequence means are reduced in
//! name order, so results do not depend on input order.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{overlap_with_truth, BoundingBox};
use crate::model::{Attribute, AttributeSet, Sequence, TrackerRun};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error("no frame with a visible target; recall is undefined")]
    EmptyEvaluation,
    #[error("sequence `{0}` is missing, extra, or has a mismatched length")]
    SequenceMismatch(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    /// Per-sequence means, then the mean over sequences.
    SequenceBased,
    /// One mean over the frames of all sequences.
    FrameBased,
}

impl Protocol {
    pub const BOTH: [Protocol; 2] = [Protocol::SequenceBased, Protocol::FrameBased];

    pub fn name(self) -> &'static str {
        match self {
            Protocol::SequenceBased => "sequence-based",
            Protocol::FrameBased => "frame-based",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One evaluated frame (initialization frames are never records).
#[derive(Debug, Clone, PartialEq)]
pub struct FrameRecord {
    pub sequence: Arc<str>,
    pub frame: usize,
    pub truth: Option<BoundingBox>,
    pub pred: BoundingBox,
    pub score: f64,
    pub attributes: AttributeSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsPoint {
    pub tau: f64,
    pub pr: f64,
    pub re: f64,
    pub f: f64,
}

impl MetricsPoint {
    pub fn new(tau: f64, pr: f64, re: f64) -> Self {
        Self {
            tau,
            pr,
            re,
            f: f_score(pr, re),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PRCurve {
    pub protocol: Protocol,
    /// Ascending in `tau`.
    pub points: Vec<MetricsPoint>,
    /// Highest F; the smallest `tau` wins ties.
    pub best: MetricsPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub tracker: String,
    pub fps: Option<f64>,
    pub sequence_based: PRCurve,
    pub frame_based: PRCurve,
    /// Best frame-based F per attribute; attributes without tagged frames
    /// (or without a visible target among them) are absent.
    pub attributes: BTreeMap<Attribute, f64>,
    pub frames: usize,
    pub sequences: usize,
}

impl MetricsReport {
    pub fn curve(&self, protocol: Protocol) -> &PRCurve {
        match protocol {
            Protocol::SequenceBased => &self.sequence_based,
            Protocol::FrameBased => &self.frame_based,
        }
    }

    pub fn best(&self, protocol: Protocol) -> MetricsPoint {
        self.curve(protocol).best
    }
}

/// The prediction if it survives threshold `tau` (inclusive).
pub fn gate(record: &FrameRecord, tau: f64) -> Option<BoundingBox> {
    (record.score >= tau).then_some(record.pred)
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f_score(pr: f64, re: f64) -> f64 {
    if pr + re > 0.0 {
        2.0 * pr * re / (pr + re)
    } else {
        0.0
    }
}

/// Records sorted into canonical order with overlaps precomputed.
struct Prepared {
    /// (score, sequence slot, overlap), score descending.
    entries: Vec<(f64, usize, f64)>,
    /// Visible-target frame count per sequence slot (slots in name order).
    visible: Vec<usize>,
}

impl Prepared {
    fn new(records: &[FrameRecord]) -> Result<Self, MetricsError> {
        let mut names: Vec<&str> = records.iter().map(|r| &*r.sequence).collect();
        names.sort_unstable();
        names.dedup();
        let slot: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (*n, i)).collect();

        let mut order: Vec<&FrameRecord> = records.iter().collect();
        order.sort_by(|a, b| canonical_cmp(a, b));

        let mut visible = vec![0usize; names.len()];
        let entries = order
            .into_iter()
            .map(|r| {
                let s = slot[&*r.sequence];
                if r.truth.is_some() {
                    visible[s] += 1;
                }
                (r.score, s, overlap_with_truth(Some(&r.pred), r.truth.as_ref()))
            })
            .collect();
        if visible.iter().all(|&v| v == 0) {
            return Err(MetricsError::EmptyEvaluation);
        }
        Ok(Self { entries, visible })
    }

    /// Thresholds to sample: 0 plus every distinct score, ascending.
    fn grid(&self) -> Vec<f64> {
        let mut taus: Vec<f64> = self.entries.iter().rev().map(|e| e.0).collect();
        taus.push(0.0);
        taus.sort_by(f64::total_cmp);
        taus.dedup_by(|a, b| a == b);
        taus
    }
}

fn canonical_cmp(a: &FrameRecord, b: &FrameRecord) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| a.sequence.cmp(&b.sequence))
        .then_with(|| a.frame.cmp(&b.frame))
}

/// Running sums over the gated prefix of the canonical order.
struct Accumulator<'a> {
    prepared: &'a Prepared,
    next: usize,
    overlap: f64,
    predicted: usize,
    seq_overlap: Vec<f64>,
    seq_predicted: Vec<usize>,
}

impl<'a> Accumulator<'a> {
    fn new(prepared: &'a Prepared) -> Self {
        let n = prepared.visible.len();
        Self {
            prepared,
            next: 0,
            overlap: 0.0,
            predicted: 0,
            seq_overlap: vec![0.0; n],
            seq_predicted: vec![0; n],
        }
    }

    /// Admits every record with `score >= tau`. Thresholds must be fed in
    /// descending order.
    fn lower_to(&mut self, tau: f64) {
        let entries = &self.prepared.entries;
        while self.next < entries.len() && entries[self.next].0 >= tau {
            let (_, s, ov) = entries[self.next];
            self.overlap += ov;
            self.predicted += 1;
            self.seq_overlap[s] += ov;
            self.seq_predicted[s] += 1;
            self.next += 1;
        }
    }

    fn point(&self, tau: f64, protocol: Protocol) -> MetricsPoint {
        match protocol {
            Protocol::FrameBased => {
                let visible: usize = self.prepared.visible.iter().sum();
                let pr = if self.predicted > 0 {
                    self.overlap / self.predicted as f64
                } else {
                    0.0
                };
                MetricsPoint::new(tau, pr, self.overlap / visible as f64)
            }
            Protocol::SequenceBased => {
                let mut pr_sum = 0.0;
                let mut re_sum = 0.0;
                let mut with_visible = 0usize;
                for (i, &vis) in self.prepared.visible.iter().enumerate() {
                    if self.seq_predicted[i] > 0 {
                        pr_sum += self.seq_overlap[i] / self.seq_predicted[i] as f64;
                    }
                    if vis > 0 {
                        re_sum += self.seq_overlap[i] / vis as f64;
                        with_visible += 1;
                    }
                }
                let n = self.prepared.visible.len() as f64;
                MetricsPoint::new(tau, pr_sum / n, re_sum / with_visible as f64)
            }
        }
    }
}

/// Precision and recall at a single threshold.
pub fn pr_re_at(records: &[FrameRecord], tau: f64, protocol: Protocol) -> Result<(f64, f64), MetricsError> {
    let prepared = Prepared::new(records)?;
    let mut acc = Accumulator::new(&prepared);
    acc.lower_to(tau);
    let p = acc.point(tau, protocol);
    Ok((p.pr, p.re))
}

fn sweep_prepared(prepared: &Prepared, protocols: &[Protocol]) -> Vec<PRCurve> {
    let grid = prepared.grid();
    let mut acc = Accumulator::new(prepared);
    let mut points: Vec<Vec<MetricsPoint>> = vec![Vec::with_capacity(grid.len()); protocols.len()];
    for &tau in grid.iter().rev() {
        acc.lower_to(tau);
        for (k, &p) in protocols.iter().enumerate() {
            points[k].push(acc.point(tau, p));
        }
    }
    protocols
        .iter()
        .zip(points)
        .map(|(&protocol, mut pts)| {
            pts.reverse();
            let mut best = pts[0];
            for p in &pts[1..] {
                if p.f > best.f {
                    best = *p;
                }
            }
            PRCurve {
                protocol,
                points: pts,
                best,
            }
        })
        .collect()
}

/// Full precision/recall curve over all observed thresholds.
pub fn sweep(records: &[FrameRecord], protocol: Protocol) -> Result<PRCurve, MetricsError> {
    let prepared = Prepared::new(records)?;
    Ok(sweep_prepared(&prepared, &[protocol]).remove(0))
}

/// Best frame-based F restricted to the frames carrying each attribute.
pub fn attribute_fscores(records: &[FrameRecord]) -> BTreeMap<Attribute, f64> {
    Attribute::ALL
        .par_iter()
        .filter_map(|&a| {
            let subset: Vec<FrameRecord> = records
                .iter()
                .filter(|r| r.attributes.analysis_contains(a))
                .cloned()
                .collect();
            if subset.is_empty() {
                return None;
            }
            sweep(&subset, Protocol::FrameBased).ok().map(|c| (a, c.best.f))
        })
        .collect()
}

/// Pairs each sequence with its run outputs, dropping frame 0.
pub fn build_records(sequences: &[Sequence], run: &TrackerRun) -> Result<Vec<FrameRecord>, MetricsError> {
    let mut names: Vec<&str> = sequences.iter().map(|s| s.name.as_str()).collect();
    names.sort_unstable();
    for name in run.sequences.keys() {
        if names.binary_search(&name.as_str()).is_err() {
            return Err(MetricsError::SequenceMismatch(name.clone()));
        }
    }
    let mut sorted: Vec<&Sequence> = sequences.iter().collect();
    sorted.sort_by(|a, b| a.name.cmp(&b.name));
    let mut records = Vec::with_capacity(sequences.iter().map(|s| s.len().saturating_sub(1)).sum());
    for seq in sorted {
        let outputs = match run.sequences.get(&seq.name) {
            Some(o) if o.len() == seq.len() => o,
            _ => return Err(MetricsError::SequenceMismatch(seq.name.clone())),
        };
        let name: Arc<str> = Arc::from(seq.name.as_str());
        for (i, (truth, out)) in seq.frames.iter().zip(outputs).enumerate().skip(1) {
            records.push(FrameRecord {
                sequence: name.clone(),
                frame: i,
                truth: truth.target,
                pred: out.bbox,
                score: out.score,
                attributes: truth.attributes,
            });
        }
    }
    Ok(records)
}

/// Scores one tracker run against the dataset under both protocols.
pub fn evaluate(sequences: &[Sequence], run: &TrackerRun) -> Result<MetricsReport, MetricsError> {
    let records = build_records(sequences, run)?;
    let prepared = Prepared::new(&records)?;
    let mut curves = sweep_prepared(&prepared, &Protocol::BOTH);
    let frame_based = curves.pop().expect("two curves");
    let sequence_based = curves.pop().expect("two curves");
    Ok(MetricsReport {
        tracker: run.tracker.clone(),
        fps: run.fps,
        sequence_based,
        frame_based,
        attributes: attribute_fscores(&records),
        frames: records.len(),
        sequences: prepared.visible.len(),
    })
}
