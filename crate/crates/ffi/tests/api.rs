use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use ltbench::ingest::{self, RunMeta};
use ltbench::synth::{generate_suite, simulate_run, suite_specs, write_dataset, SimTrackerSpec, SuiteKind};
use ltbench_ffi::*;

fn last_error() -> String {
    let mut buf = [0 as c_char; 256];
    unsafe { ltb_last_error_message(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn cpath(p: &Path) -> CString {
    CString::new(p.to_str().unwrap()).unwrap()
}

#[test]
fn geometry_and_scores() {
    let a = LtbBox { x: 0., y: 0., w: 2., h: 2. };
    let b = LtbBox { x: 1., y: 1., w: 2., h: 2. };
    let mut v = -1.0;
    assert_eq!(unsafe { ltb_iou(&a, &b, &mut v) }, LtbStatus::Ok);
    assert!((v - 1.0 / 7.0).abs() < 1e-15);
    assert!((ltb_f_score(0.560, 0.506) - 0.532).abs() < 0.002);
    assert_eq!(ltb_f_score(0.0, 0.0), 0.0);
    let version = unsafe { CStr::from_ptr(ltb_version()) };
    assert_eq!(version.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn errors_are_codes_with_messages() {
    let a = LtbBox { x: 0., y: 0., w: -1., h: 2. };
    let mut v = 0.0;
    assert_eq!(unsafe { ltb_iou(&a, &a, &mut v) }, LtbStatus::InvalidArgument);
    assert!(last_error().contains("negative"));
    assert_eq!(unsafe { ltb_iou(ptr::null(), &a, &mut v) }, LtbStatus::NullPointer);
    assert!(last_error().contains("null"));

    let mut d = ptr::null_mut();
    let missing = CString::new("/nonexistent/ltbench").unwrap();
    assert_eq!(unsafe { ltb_dataset_load(missing.as_ptr(), &mut d) }, LtbStatus::Io);
    assert!(d.is_null());
    // truncation keeps the terminator and reports the full length
    let mut small = [0 as c_char; 4];
    let full = unsafe { ltb_last_error_message(small.as_mut_ptr(), small.len()) };
    assert!(full > 3);
    assert_eq!(unsafe { CStr::from_ptr(small.as_ptr()) }.to_bytes().len(), 3);

    let bad = CString::new("fusion = min").unwrap();
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { ltb_tracker_new(bad.as_ptr(), &mut t) }, LtbStatus::InvalidArgument);
    unsafe {
        ltb_dataset_free(ptr::null_mut());
        ltb_run_free(ptr::null_mut());
        ltb_report_free(ptr::null_mut());
        ltb_tracker_free(ptr::null_mut());
    }
}

#[test]
fn evaluates_written_runs() {
    let dir = tempfile::tempdir().unwrap();
    let suite = generate_suite(&suite_specs(SuiteKind::Standard, 2, 20, 4)).unwrap();
    let root = dir.path().join("data");
    write_dataset(&root, &suite).unwrap();
    let seqs: Vec<_> = suite.iter().map(|s| s.sequence.clone()).collect();
    let run = simulate_run("perfect", &SimTrackerSpec::perfect(), &seqs).unwrap();
    let run_dir = ingest::write_tracker_run(&dir.path().join("results"), &run, &RunMeta::default()).unwrap();

    unsafe {
        let (mut d, mut r, mut rep) = (ptr::null_mut(), ptr::null_mut(), ptr::null_mut());
        assert_eq!(ltb_dataset_load(cpath(&root).as_ptr(), &mut d), LtbStatus::Ok);
        assert_eq!(ltb_dataset_len(d), 2);
        assert_eq!(ltb_run_load(cpath(&run_dir).as_ptr(), &mut r), LtbStatus::Ok);
        assert_eq!(ltb_evaluate(d, r, &mut rep), LtbStatus::Ok);
        for p in [LtbProtocol::SequenceBased, LtbProtocol::FrameBased] {
            let mut best = LtbPoint::default();
            assert_eq!(ltb_report_best(rep, p, &mut best), LtbStatus::Ok);
            assert_eq!((best.pr, best.re, best.f), (1.0, 1.0, 1.0));
            let n = ltb_report_curve_len(rep, p);
            assert!(n >= 2);
            let mut pt = LtbPoint::default();
            assert_eq!(ltb_report_curve_point(rep, p, 0, &mut pt), LtbStatus::Ok);
            assert_eq!(pt.tau, 0.0);
            assert_eq!(ltb_report_curve_point(rep, p, n, &mut pt), LtbStatus::InvalidArgument);
        }
        ltb_report_free(rep);
        ltb_run_free(r);
        ltb_dataset_free(d);
    }
}

#[test]
fn tracker_lifecycle() {
    let suite = generate_suite(&suite_specs(SuiteKind::Standard, 1, 3, 8)).unwrap();
    let s = &suite[0];
    let (w, h) = s.sequence.resolution;
    let init = s.sequence.init_box();
    let b = LtbBox { x: init.x, y: init.y, w: init.w, h: init.h };
    unsafe {
        let mut t = ptr::null_mut();
        assert_eq!(ltb_tracker_new(ptr::null(), &mut t), LtbStatus::Ok);
        let (mut out, mut score) = (b, 0.0);
        let rgb0 = s.frames.rgb[0].as_raw();
        let d0 = s.frames.depth[0].as_raw();
        assert_eq!(
            ltb_tracker_step(t, rgb0.as_ptr(), d0.as_ptr(), w, h, &mut out, &mut score),
            LtbStatus::TrackerNotInitialized
        );
        let mut clipped = -1;
        assert_eq!(ltb_tracker_init(t, rgb0.as_ptr(), d0.as_ptr(), w, h, b, &mut clipped), LtbStatus::Ok);
        assert_eq!(clipped, 0);
        assert_eq!(ltb_tracker_step(t, rgb0.as_ptr(), d0.as_ptr(), w, h, &mut out, &mut score), LtbStatus::Ok);
        assert_eq!(out, b);
        assert!(score >= 0.99);
        let zero = LtbBox { x: 1., y: 1., w: 0., h: 0. };
        assert_eq!(ltb_tracker_init(t, rgb0.as_ptr(), d0.as_ptr(), w, h, zero, ptr::null_mut()), LtbStatus::Tracker);
        ltb_tracker_free(t);
    }
}

#[test]
fn header_is_valid_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/ltbench.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for f in ["ltb_iou", "ltb_evaluate", "ltb_tracker_step", "ltb_last_error_message", "LTB_STATUS_OK"] {
        assert!(text.contains(f), "{f} missing from header");
    }
    let Ok(out) = Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c"])
        .arg(&header)
        .output()
    else {
        eprintln!("no C compiler; skipping syntax check");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
