mod common;

use common::{oracle, random_instance};
use ltbench::metrics::{build_records, pr_re_at, sweep, MetricsError};
use ltbench::{evaluate, Protocol, Sequence, TrackerRun};
use proptest::prelude::*;

fn assert_matches_oracle(sequences: &[Sequence], run: &TrackerRun) {
    let Some(o) = oracle(sequences, run) else {
        assert!(matches!(evaluate(sequences, run), Err(MetricsError::EmptyEvaluation)));
        return;
    };
    let r = evaluate(sequences, run).unwrap();
    assert_eq!(r.sequence_based.points, o.sequence_based);
    assert_eq!(r.frame_based.points, o.frame_based);
    assert_eq!(r.sequence_based.best, o.best_sequence);
    assert_eq!(r.frame_based.best, o.best_frame);
    assert_eq!(r.attributes, o.attributes);
}

#[test]
fn random_instances_match_oracle_bitwise() {
    for seed in 0..300 {
        let (s, r) = random_instance(seed, 5, 50);
        assert_matches_oracle(&s, &r);
    }
}

#[test]
fn hand_enumerated_sweep() {
    use ltbench::model::FrameTruth;
    use ltbench::TrackerFrameOutput;
    let t = common::bb(0., 0., 10., 10.);
    // overlaps 0.8 at score 0.9 and 0.1 at score 0.2
    let frames = vec![FrameTruth { target: Some(t), attributes: Default::default() }; 3];
    let seq = Sequence::new("s", frames, (64, 64), 30.0).unwrap();
    let mut run = TrackerRun::new("t");
    run.sequences.insert(
        "s".into(),
        vec![
            TrackerFrameOutput { bbox: t, score: 1.0 },
            TrackerFrameOutput { bbox: common::bb(0., 0., 10., 8.), score: 0.9 },
            TrackerFrameOutput { bbox: common::bb(0., 0., 10., 1.), score: 0.2 },
        ],
    );
    let r = evaluate(&[seq.clone()], &run).unwrap();
    let at = |tau: f64| *r.frame_based.points.iter().find(|p| p.tau == tau).unwrap();
    assert!((at(0.2).f - 0.45).abs() < 1e-12);
    let p = at(0.9);
    assert!((p.pr - 0.8).abs() < 1e-12 && (p.re - 0.4).abs() < 1e-12);
    assert!((p.f - 0.8 * 0.8 / 1.2).abs() < 1e-12);
    assert_eq!(r.frame_based.best, p);
    assert_matches_oracle(&[seq], &run);
}

fn quantized(seed: u64) -> (Vec<Sequence>, TrackerRun) {
    let (s, mut r) = random_instance(seed, 5, 40);
    for outs in r.sequences.values_mut() {
        for o in outs {
            o.score = (o.score * 1000.0).round() / 1000.0;
        }
    }
    (s, r)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn oracle_equivalence(seed in any::<u64>()) {
        let (s, r) = random_instance(seed, 5, 50);
        assert_matches_oracle(&s, &r);
    }

    #[test]
    fn gating_is_monotone(seed in any::<u64>(), a in 0.0..=1.0f64, b in 0.0..=1.0f64) {
        let (s, r) = random_instance(seed, 4, 30);
        let records = build_records(&s, &r).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let gated = |tau: f64| records.iter().filter(|x| ltbench::metrics::gate(x, tau).is_some()).map(|x| (x.sequence.clone(), x.frame)).collect::<Vec<_>>();
        let (g_lo, g_hi) = (gated(lo), gated(hi));
        prop_assert!(g_hi.iter().all(|k| g_lo.contains(k)));
        if let (Ok((_, re_lo)), Ok((_, re_hi))) = (pr_re_at(&records, lo, Protocol::FrameBased), pr_re_at(&records, hi, Protocol::FrameBased)) {
            prop_assert!(re_hi <= re_lo + 1e-12);
        }
    }

    #[test]
    fn overlap_mass_identity(seed in any::<u64>(), tau in 0.0..=1.0f64) {
        let (s, r) = random_instance(seed, 5, 40);
        let records = build_records(&s, &r).unwrap();
        let Ok((pr, re)) = pr_re_at(&records, tau, Protocol::FrameBased) else { return Ok(()) };
        let a = records.iter().filter(|x| x.score >= tau).count() as f64;
        let g = records.iter().filter(|x| x.truth.is_some()).count() as f64;
        prop_assert!((pr * a - re * g).abs() <= 1e-9 * g.max(1.0));
    }

    #[test]
    fn unique_grid_attains_uniform_grid_max(seed in any::<u64>()) {
        let (s, r) = quantized(seed);
        let records = build_records(&s, &r).unwrap();
        for protocol in Protocol::BOTH {
            let Ok(curve) = sweep(&records, protocol) else { return Ok(()) };
            let mut dense = 0.0f64;
            for k in 0..=1000 {
                let (pr, re) = pr_re_at(&records, k as f64 / 1000.0, protocol).unwrap();
                dense = dense.max(ltbench::f_score(pr, re));
            }
            prop_assert!((curve.best.f - dense).abs() <= 1e-9, "{} vs {}", curve.best.f, dense);
        }
    }

    #[test]
    fn sequence_order_is_irrelevant(seed in any::<u64>(), rot in 0usize..5) {
        let (mut s, r) = random_instance(seed, 5, 30);
        let Ok(a) = evaluate(&s, &r) else { return Ok(()) };
        let k = rot % s.len();
        s.rotate_left(k);
        s.reverse();
        prop_assert_eq!(evaluate(&s, &r).unwrap(), a);
    }

    #[test]
    fn duplicating_sequences_changes_nothing(seed in any::<u64>()) {
        let (s, r) = random_instance(seed, 4, 30);
        let Ok(a) = evaluate(&s, &r) else { return Ok(()) };
        let mut s2 = s.clone();
        let mut r2 = r.clone();
        for q in &s {
            let mut d = q.clone();
            d.name = format!("{}~dup", q.name);
            r2.sequences.insert(d.name.clone(), r.sequences[&q.name].clone());
            s2.push(d);
        }
        let b = evaluate(&s2, &r2).unwrap();
        for p in Protocol::BOTH {
            let (ca, cb) = (a.curve(p), b.curve(p));
            prop_assert_eq!(ca.points.len(), cb.points.len());
            for (x, y) in ca.points.iter().zip(&cb.points) {
                prop_assert_eq!(x.tau, y.tau);
                prop_assert!((x.pr - y.pr).abs() < 1e-12 && (x.re - y.re).abs() < 1e-12 && (x.f - y.f).abs() < 1e-12);
            }
            prop_assert!((ca.best.f - cb.best.f).abs() < 1e-12);
        }
    }
}
