//! C interface to ltbench.
//!
//! Every fallible call returns an [`LtbStatus`]; on failure a message is kept
//! per thread and can be copied out with [`ltb_last_error_message`]. Handles
//! are opaque and must be released with their matching `*_free` function.
//! Panics never cross the boundary: they surface as `LTB_STATUS_PANIC`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use image::{ImageBuffer, RgbImage};
use ltbench::config::{tracker_config, KeyValues};
use ltbench::fusion::{TrackState, Tracker};
use ltbench::ingest::{self, DepthImage};
use ltbench::metrics::MetricsError;
use ltbench::{BoundingBox, MetricsReport, Protocol, Sequence, TrackerRun};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LtbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    EmptyEvaluation = 4,
    SequenceMismatch = 5,
    TrackerNotInitialized = 6,
    Tracker = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LtbBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

/// One threshold of a precision/recall curve.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LtbPoint {
    pub tau: f64,
    pub pr: f64,
    pub re: f64,
    pub f: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LtbProtocol {
    SequenceBased = 0,
    FrameBased = 1,
}

/// Ground-truth annotations of a dataset.
pub struct LtbDataset {
    sequences: Vec<Sequence>,
}

/// Result files of one tracker.
pub struct LtbRun {
    run: TrackerRun,
}

/// Curves and best points of one evaluation.
pub struct LtbReport {
    report: MetricsReport,
}

/// Correlation tracker plus its state after `ltb_tracker_init`.
pub struct LtbTracker {
    tracker: Tracker,
    state: Option<TrackState>,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

struct Failure(LtbStatus, String);

impl Failure {
    fn new(status: LtbStatus, message: impl ToString) -> Self {
        Self(status, message.to_string())
    }
}

impl From<MetricsError> for Failure {
    fn from(e: MetricsError) -> Self {
        let status = match e {
            MetricsError::EmptyEvaluation => LtbStatus::EmptyEvaluation,
            MetricsError::SequenceMismatch(_) => LtbStatus::SequenceMismatch,
        };
        Failure::new(status, e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> LtbStatus {
    let (status, message) = match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => (LtbStatus::Ok, String::new()),
        Ok(Err(Failure(s, m))) => (s, m),
        Err(_) => (LtbStatus::Panic, "internal panic".to_string()),
    };
    LAST_ERROR.with(|e| *e.borrow_mut() = message);
    status
}

unsafe fn require<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure::new(LtbStatus::NullPointer, format!("{what} is null")))
}

unsafe fn require_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| Failure::new(LtbStatus::NullPointer, format!("{what} is null")))
}

unsafe fn path_arg<'a>(p: *const c_char) -> Result<&'a Path, Failure> {
    let s = require(p, "path")?;
    let s = CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Failure::new(LtbStatus::InvalidArgument, "path is not UTF-8"))?;
    Ok(Path::new(s))
}

fn to_box(b: &LtbBox) -> Result<BoundingBox, Failure> {
    BoundingBox::new(b.x, b.y, b.w, b.h).map_err(|e| Failure::new(LtbStatus::InvalidArgument, e))
}

fn from_box(b: BoundingBox) -> LtbBox {
    LtbBox {
        x: b.x,
        y: b.y,
        w: b.w,
        h: b.h,
    }
}

fn protocol(p: LtbProtocol) -> Protocol {
    match p {
        LtbProtocol::SequenceBased => Protocol::SequenceBased,
        LtbProtocol::FrameBased => Protocol::FrameBased,
    }
}

fn point(p: ltbench::MetricsPoint) -> LtbPoint {
    LtbPoint {
        tau: p.tau,
        pr: p.pr,
        re: p.re,
        f: p.f,
    }
}

fn into_handle<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::new(LtbStatus::NullPointer, "output handle is null"));
    }
    unsafe { *out = Box::into_raw(Box::new(value)) };
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ltb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (truncated,
/// always NUL-terminated when `len > 0`). Returns the full message length
/// excluding the terminator.
#[no_mangle]
pub unsafe extern "C" fn ltb_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Intersection over union of two boxes.
#[no_mangle]
pub unsafe extern "C" fn ltb_iou(a: *const LtbBox, b: *const LtbBox, out: *mut f64) -> LtbStatus {
    guard(|| {
        let a = to_box(require(a, "a")?)?;
        let b = to_box(require(b, "b")?)?;
        *require_mut(out, "out")? = ltbench::iou(&a, &b);
        Ok(())
    })
}

/// Harmonic mean of precision and recall (0 when both are 0).
#[no_mangle]
pub extern "C" fn ltb_f_score(pr: f64, re: f64) -> f64 {
    ltbench::f_score(pr, re)
}

/// Loads the annotations (no pixels) of every sequence under `root`.
#[no_mangle]
pub unsafe extern "C" fn ltb_dataset_load(root: *const c_char, out: *mut *mut LtbDataset) -> LtbStatus {
    guard(|| {
        let root = path_arg(root)?;
        let sequences = ingest::load_dataset_annotations(root).map_err(|e| Failure::new(LtbStatus::Io, e))?;
        into_handle(out, LtbDataset { sequences })
    })
}

#[no_mangle]
pub unsafe extern "C" fn ltb_dataset_len(dataset: *const LtbDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.sequences.len())
}

#[no_mangle]
pub unsafe extern "C" fn ltb_dataset_free(dataset: *mut LtbDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// Loads one tracker's result directory.
#[no_mangle]
pub unsafe extern "C" fn ltb_run_load(dir: *const c_char, out: *mut *mut LtbRun) -> LtbStatus {
    guard(|| {
        let dir = path_arg(dir)?;
        let run = ingest::read_tracker_run(dir).map_err(|e| Failure::new(LtbStatus::Io, e))?;
        into_handle(out, LtbRun { run })
    })
}

#[no_mangle]
pub unsafe extern "C" fn ltb_run_free(run: *mut LtbRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Evaluates a run against a dataset under both protocols.
#[no_mangle]
pub unsafe extern "C" fn ltb_evaluate(
    dataset: *const LtbDataset,
    run: *const LtbRun,
    out: *mut *mut LtbReport,
) -> LtbStatus {
    guard(|| {
        let d = require(dataset, "dataset")?;
        let r = require(run, "run")?;
        let report = ltbench::evaluate(&d.sequences, &r.run)?;
        into_handle(out, LtbReport { report })
    })
}

/// Best (highest F) point of one protocol.
#[no_mangle]
pub unsafe extern "C" fn ltb_report_best(report: *const LtbReport, protocol_: LtbProtocol, out: *mut LtbPoint) -> LtbStatus {
    guard(|| {
        let r = require(report, "report")?;
        *require_mut(out, "out")? = point(r.report.best(protocol(protocol_)));
        Ok(())
    })
}

/// Number of thresholds on a protocol's curve; 0 for a null report.
#[no_mangle]
pub unsafe extern "C" fn ltb_report_curve_len(report: *const LtbReport, protocol_: LtbProtocol) -> usize {
    report.as_ref().map_or(0, |r| r.report.curve(protocol(protocol_)).points.len())
}

/// Curve point `index`, in ascending threshold order.
#[no_mangle]
pub unsafe extern "C" fn ltb_report_curve_point(
    report: *const LtbReport,
    protocol_: LtbProtocol,
    index: usize,
    out: *mut LtbPoint,
) -> LtbStatus {
    guard(|| {
        let r = require(report, "report")?;
        let points = &r.report.curve(protocol(protocol_)).points;
        let p = points
            .get(index)
            .ok_or_else(|| Failure::new(LtbStatus::InvalidArgument, format!("index {index} past {} points", points.len())))?;
        *require_mut(out, "out")? = point(*p);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ltb_report_free(report: *mut LtbReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Creates a tracker from `key = value` settings text (NULL for defaults).
#[no_mangle]
pub unsafe extern "C" fn ltb_tracker_new(config: *const c_char, out: *mut *mut LtbTracker) -> LtbStatus {
    guard(|| {
        let kv = if config.is_null() {
            KeyValues::default()
        } else {
            let text = CStr::from_ptr(config)
                .to_str()
                .map_err(|_| Failure::new(LtbStatus::InvalidArgument, "config is not UTF-8"))?;
            KeyValues::parse(text).map_err(|e| Failure::new(LtbStatus::InvalidArgument, e))?
        };
        let (cfg, _) = tracker_config(&kv).map_err(|e| Failure::new(LtbStatus::InvalidArgument, e))?;
        let tracker = Tracker::new(cfg).map_err(|e| Failure::new(LtbStatus::InvalidArgument, e))?;
        into_handle(out, LtbTracker { tracker, state: None })
    })
}

/// Wraps caller memory: `rgb` is `width*height*3` interleaved bytes,
/// `depth` is `width*height` millimetre values (0 = invalid).
unsafe fn frame(rgb: *const u8, depth: *const u16, width: u32, height: u32) -> Result<(RgbImage, DepthImage), Failure> {
    let rgb = require(rgb, "rgb")?;
    let depth = require(depth, "depth")?;
    let n = width as usize * height as usize;
    if n == 0 {
        return Err(Failure::new(LtbStatus::InvalidArgument, "frame has no pixels"));
    }
    let rgb = std::slice::from_raw_parts(rgb, n * 3).to_vec();
    let depth = std::slice::from_raw_parts(depth, n).to_vec();
    Ok((
        ImageBuffer::from_raw(width, height, rgb).expect("length matches"),
        ImageBuffer::from_raw(width, height, depth).expect("length matches"),
    ))
}

/// Builds the template from the first frame. `clipped` (optional) receives
/// 1 when the box extended past the frame and was clipped.
#[no_mangle]
pub unsafe extern "C" fn ltb_tracker_init(
    tracker: *mut LtbTracker,
    rgb: *const u8,
    depth: *const u16,
    width: u32,
    height: u32,
    bbox: LtbBox,
    clipped: *mut i32,
) -> LtbStatus {
    guard(|| {
        let t = require_mut(tracker, "tracker")?;
        let (rgb, depth) = frame(rgb, depth, width, height)?;
        let state = t
            .tracker
            .init(&rgb, &depth, to_box(&bbox)?)
            .map_err(|e| Failure::new(LtbStatus::Tracker, e))?;
        if let Some(c) = clipped.as_mut() {
            *c = state.clipped as i32;
        }
        t.state = Some(state);
        Ok(())
    })
}

/// Tracks into the next frame, writing the box and a presence score in
/// [0, 1].
#[no_mangle]
pub unsafe extern "C" fn ltb_tracker_step(
    tracker: *mut LtbTracker,
    rgb: *const u8,
    depth: *const u16,
    width: u32,
    height: u32,
    out_box: *mut LtbBox,
    out_score: *mut f64,
) -> LtbStatus {
    guard(|| {
        let t = require_mut(tracker, "tracker")?;
        let out_box = require_mut(out_box, "out_box")?;
        let out_score = require_mut(out_score, "out_score")?;
        let (rgb, depth) = frame(rgb, depth, width, height)?;
        let state = t
            .state
            .as_mut()
            .ok_or_else(|| Failure::new(LtbStatus::TrackerNotInitialized, "call ltb_tracker_init first"))?;
        let (b, s) = t
            .tracker
            .step(state, &rgb, &depth)
            .map_err(|e| Failure::new(LtbStatus::Tracker, e))?;
        *out_box = from_box(b);
        *out_score = s;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ltb_tracker_free(tracker: *mut LtbTracker) {
    if !tracker.is_null() {
        drop(Box::from_raw(tracker));
    }
}
