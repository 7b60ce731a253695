//! Shared fixtures and an independent brute-force metrics oracle.
#![allow(dead_code)]

use std::collections::BTreeMap;

use ltbench::model::{Attribute, AttributeSet, FrameTruth};
use ltbench::{BoundingBox, MetricsPoint, Sequence, TrackerFrameOutput, TrackerRun};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn bb(x: f64, y: f64, w: f64, h: f64) -> BoundingBox {
    BoundingBox::new(x, y, w, h).unwrap()
}

fn oracle_iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    if a == b {
        return if a.w * a.h > 0.0 { 1.0 } else { 0.0 };
    }
    let iw = (a.x + a.w).min(b.x + b.w) - a.x.max(b.x);
    let ih = (a.y + a.h).min(b.y + b.h) - a.y.max(b.y);
    let inter = if iw > 0.0 && ih > 0.0 { iw * ih } else { 0.0 };
    let union = a.w * a.h + b.w * b.h - inter;
    if union > 0.0 {
        (inter / union).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

fn oracle_f(pr: f64, re: f64) -> f64 {
    if pr + re > 0.0 {
        2.0 * pr * re / (pr + re)
    } else {
        0.0
    }
}

/// One evaluated frame as the oracle sees it.
#[derive(Clone)]
struct Entry {
    score: f64,
    seq: String,
    frame: usize,
    visible: bool,
    overlap: f64,
    attrs: AttributeSet,
}

fn entries(sequences: &[Sequence], run: &TrackerRun) -> Vec<Entry> {
    let mut out = Vec::new();
    for s in sequences {
        let preds = &run.sequences[&s.name];
        for t in 1..s.len() {
            let truth = s.frames[t].target;
            out.push(Entry {
                score: preds[t].score,
                seq: s.name.clone(),
                frame: t,
                visible: truth.is_some(),
                overlap: truth.map_or(0.0, |g| oracle_iou(&preds[t].bbox, &g)),
                attrs: s.frames[t].attributes,
            });
        }
    }
    // score descending, then sequence name, then frame
    out.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap()
            .then(a.seq.cmp(&b.seq))
            .then(a.frame.cmp(&b.frame))
    });
    out
}

fn grid(es: &[Entry]) -> Vec<f64> {
    let mut g = vec![0.0];
    for e in es {
        if !g.contains(&e.score) {
            g.push(e.score);
        }
    }
    g.sort_by(|a, b| a.partial_cmp(b).unwrap());
    g
}

fn frame_point(es: &[Entry], tau: f64) -> MetricsPoint {
    let visible = es.iter().filter(|e| e.visible).count();
    let mut mass = 0.0;
    let mut n = 0usize;
    for e in es {
        if e.score >= tau {
            mass += e.overlap;
            n += 1;
        }
    }
    let pr = if n > 0 { mass / n as f64 } else { 0.0 };
    let re = mass / visible as f64;
    MetricsPoint { tau, pr, re, f: oracle_f(pr, re) }
}

fn sequence_point(es: &[Entry], tau: f64) -> MetricsPoint {
    let mut names: Vec<&str> = es.iter().map(|e| e.seq.as_str()).collect();
    names.sort();
    names.dedup();
    let (mut pr_sum, mut re_sum, mut with_visible) = (0.0, 0.0, 0usize);
    for name in &names {
        let mut mass = 0.0;
        let mut n = 0usize;
        let mut vis = 0usize;
        for e in es.iter().filter(|e| e.seq == *name) {
            vis += e.visible as usize;
            if e.score >= tau {
                mass += e.overlap;
                n += 1;
            }
        }
        if n > 0 {
            pr_sum += mass / n as f64;
        }
        if vis > 0 {
            re_sum += mass / vis as f64;
            with_visible += 1;
        }
    }
    let pr = pr_sum / names.len() as f64;
    let re = re_sum / with_visible as f64;
    MetricsPoint { tau, pr, re, f: oracle_f(pr, re) }
}

fn best(points: &[MetricsPoint]) -> MetricsPoint {
    let mut b = points[0];
    for p in points {
        if p.f > b.f {
            b = *p;
        }
    }
    b
}

pub struct OracleCurves {
    pub sequence_based: Vec<MetricsPoint>,
    pub frame_based: Vec<MetricsPoint>,
    pub best_sequence: MetricsPoint,
    pub best_frame: MetricsPoint,
    pub attributes: BTreeMap<Attribute, f64>,
}

/// Recomputes every threshold from scratch; `None` when no evaluated frame
/// shows the target.
pub fn oracle(sequences: &[Sequence], run: &TrackerRun) -> Option<OracleCurves> {
    let es = entries(sequences, run);
    if !es.iter().any(|e| e.visible) {
        return None;
    }
    let g = grid(&es);
    let sequence_based: Vec<_> = g.iter().map(|&t| sequence_point(&es, t)).collect();
    let frame_based: Vec<_> = g.iter().map(|&t| frame_point(&es, t)).collect();
    let mut attributes = BTreeMap::new();
    for a in Attribute::ALL {
        let sub: Vec<Entry> = es
            .iter()
            .filter(|e| if e.attrs.is_empty() { a == Attribute::NaN } else { e.attrs.contains(a) })
            .cloned()
            .collect();
        if sub.iter().any(|e| e.visible) {
            let pts: Vec<_> = grid(&sub).iter().map(|&t| frame_point(&sub, t)).collect();
            attributes.insert(a, best(&pts).f);
        }
    }
    Some(OracleCurves {
        best_sequence: best(&sequence_based),
        best_frame: best(&frame_based),
        sequence_based,
        frame_based,
        attributes,
    })
}

/// Random dataset plus run: up to `max_seqs` sequences of up to
/// `max_frames` frames, random visibility, boxes, attributes, and scores
/// drawn from a small pool so ties are common.
pub fn random_instance(seed: u64, max_seqs: usize, max_frames: usize) -> (Vec<Sequence>, TrackerRun) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool: Vec<f64> = (0..rng.gen_range(1..6)).map(|_| rng.gen_range(0.0..=1.0)).collect();
    let n_seqs = rng.gen_range(1..=max_seqs);
    let mut sequences = Vec::new();
    let mut run = TrackerRun::new("random");
    for s in 0..n_seqs {
        let len = rng.gen_range(1..=max_frames);
        let p_visible = rng.gen_range(0.0..=1.0);
        let mut frames = Vec::with_capacity(len);
        let mut outputs = Vec::with_capacity(len);
        for t in 0..len {
            let truth = (t == 0 || rng.gen_bool(p_visible))
                .then(|| bb(rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0), rng.gen_range(1.0..40.0), rng.gen_range(1.0..40.0)));
            let mut attributes = AttributeSet::empty();
            for a in Attribute::TAGGED {
                if rng.gen_bool(0.15) {
                    attributes.insert(a);
                }
            }
            let pred = match truth {
                Some(g) if rng.gen_bool(0.7) => g.translate(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)),
                Some(g) if rng.gen_bool(0.3) => g,
                _ => bb(rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0), rng.gen_range(0.0..40.0), rng.gen_range(0.0..40.0)),
            };
            let score = if rng.gen_bool(0.8) { pool[rng.gen_range(0..pool.len())] } else { rng.gen_range(0.0..=1.0) };
            frames.push(FrameTruth { target: truth, attributes });
            outputs.push(TrackerFrameOutput { bbox: pred, score });
        }
        let name = format!("seq{:02}", (s * 7) % 11);
        let name = if sequences.iter().any(|q: &Sequence| q.name == name) { format!("{name}-{s}") } else { name };
        run.sequences.insert(name.clone(), outputs);
        sequences.push(Sequence::new(name, frames, (640, 360), 30.0).unwrap());
    }
    (sequences, run)
}
