//! Frozen measurements of the correlation tracker on the seeded standard
//! suite (20 sequences x 300 frames, seed 7, default rgbd-max settings).

use ltbench::fusion::Tracker;
use ltbench::synth::{generate_suite, suite_specs, SuiteKind};

#[test]
fn absent_frame_scores_on_standard_suite() {
    let suite = generate_suite(&suite_specs(SuiteKind::Standard, 20, 300, 7)).unwrap();
    let t = Tracker::default();
    let (mut absent, mut present) = (Vec::new(), Vec::new());
    for s in &suite {
        let out = t.run_sequence(&s.sequence, &s.frames).unwrap();
        for (f, o) in s.sequence.frames.iter().zip(&out).skip(1) {
            if f.target.is_some() { &mut present } else { &mut absent }.push(o.score);
        }
    }
    absent.sort_by(f64::total_cmp);
    let below = absent.iter().filter(|&&s| s < 0.5).count();
    let median = absent[absent.len() / 2];
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    println!(
        "absent frames {}: {} below 0.5, median {median:.4}, mean {:.4}; present mean {:.4}",
        absent.len(),
        below,
        mean(&absent),
        mean(&present)
    );
    assert_eq!(absent.len(), 600);
    // The max over a few hundred placements keeps background-only peaks
    // above zero, so no absent frame falls under the 0.5 presence line.
    assert_eq!(below, 0);
    assert!((median - 0.571).abs() < 0.002, "median {median}");
    assert!(mean(&present) > mean(&absent) + 0.1);
}
