//! Dataset and results directory layouts.
//!
//! ```text
//! <root>/dataset.json              optional {"resolution": [w, h], "fps": r}
//! <root>/<sequence>/color/*.jpg    8-bit RGB
//! <root>/<sequence>/depth/*.png    16-bit grayscale, millimeters
//! <root>/<sequence>/groundtruth.txt
//! <root>/<sequence>/<ATTR>.tag     optional, one per attribute
//!
//! <results>/<tracker>/<sequence>.txt
//! <results>/<tracker>/meta.json    optional {"fps": r}
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use image::{DynamicImage, ImageFormat, RgbImage};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::frames::{decode, DepthImage, DiskFrames};
use super::text::{self, ParseError};
use crate::model::{Attribute, AttributeSet, FrameTruth, Sequence, SequenceError, TrackerRun};

pub const GROUNDTRUTH_FILE: &str = "groundtruth.txt";
pub const DATASET_META_FILE: &str = "dataset.json";
pub const RUN_META_FILE: &str = "meta.json";
pub const DEFAULT_RESOLUTION: (u32, u32) = (640, 360);
pub const DEFAULT_FRAME_RATE: f64 = 30.0;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: ParseError,
    },
    #[error("{path}: {message}")]
    Invalid { path: PathBuf, message: String },
    #[error(transparent)]
    Sequence(#[from] SequenceError),
}

impl IngestError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn invalid(path: &Path, message: impl Into<String>) -> Self {
        Self::Invalid {
            path: path.to_path_buf(),
            message: message.into(),
        }
    }
}

/// Optional dataset-wide metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub resolution: (u32, u32),
    #[serde(default = "default_fps")]
    pub fps: f64,
}

fn default_fps() -> f64 {
    DEFAULT_FRAME_RATE
}

impl Default for DatasetMeta {
    fn default() -> Self {
        Self {
            resolution: DEFAULT_RESOLUTION,
            fps: DEFAULT_FRAME_RATE,
        }
    }
}

pub fn read_dataset_meta(root: &Path) -> Result<Option<DatasetMeta>, IngestError> {
    let path = root.join(DATASET_META_FILE);
    if !path.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(&path).map_err(|e| IngestError::io(&path, e))?;
    serde_json::from_str(&text)
        .map(Some)
        .map_err(|e| IngestError::invalid(&path, e.to_string()))
}

/// Metadata stored next to a tracker's result files.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fps: Option<f64>,
    /// `ST` or `LT`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub term: Option<String>,
    /// `RGB`, `D`, or `RGBD`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modality: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub sequence: String,
    pub frame: Option<usize>,
    pub severity: Severity,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn errors(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity == Severity::Error)
    }

    pub fn has_errors(&self) -> bool {
        self.errors().next().is_some()
    }

    pub fn is_clean(&self) -> bool {
        self.findings.is_empty()
    }

    fn sort(&mut self) {
        self.findings.sort_by(|a, b| {
            (&a.sequence, a.frame, &a.message).cmp(&(&b.sequence, b.frame, &b.message))
        });
    }
}

impl std::fmt::Display for Finding {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        match self.frame {
            Some(i) => write!(f, "{sev}: {} frame {i}: {}", self.sequence, self.message),
            None => write!(f, "{sev}: {}: {}", self.sequence, self.message),
        }
    }
}

/// Sequence directories under `root`, sorted by name. Hidden entries are skipped.
pub fn sequence_dirs(root: &Path) -> Result<Vec<PathBuf>, IngestError> {
    let mut dirs = Vec::new();
    for entry in fs::read_dir(root).map_err(|e| IngestError::io(root, e))? {
        let entry = entry.map_err(|e| IngestError::io(root, e))?;
        let path = entry.path();
        let hidden = entry.file_name().to_string_lossy().starts_with('.');
        if path.is_dir() && !hidden {
            dirs.push(path);
        }
    }
    dirs.sort();
    Ok(dirs)
}

fn dir_name(path: &Path) -> String {
    path.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Regular files in `dir`, sorted by name.
fn list_files(dir: &Path) -> Result<Vec<PathBuf>, IngestError> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| IngestError::io(dir, e))? {
        let entry = entry.map_err(|e| IngestError::io(dir, e))?;
        let path = entry.path();
        if path.is_file() && !entry.file_name().to_string_lossy().starts_with('.') {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn has_ext(path: &Path, exts: &[&str]) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| exts.iter().any(|x| e.eq_ignore_ascii_case(x)))
}

/// Reads every `<ATTR>.tag` file present in `dir`. Unknown tag names are
/// returned separately.
fn read_tags(
    dir: &Path,
    frames: usize,
) -> Result<(BTreeMap<Attribute, Vec<bool>>, Vec<String>), IngestError> {
    let mut tags = BTreeMap::new();
    let mut unknown = Vec::new();
    for path in list_files(dir)? {
        if !has_ext(&path, &["tag"]) {
            continue;
        }
        let stem = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
        match stem.parse::<Attribute>() {
            Ok(a) if a != Attribute::NaN => {
                let text = fs::read_to_string(&path).map_err(|e| IngestError::io(&path, e))?;
                let flags = text::parse_attribute_tags(Some(&text), frames)
                    .map_err(|source| IngestError::Parse { path: path.clone(), source })?;
                tags.insert(a, flags);
            }
            _ => unknown.push(stem),
        }
    }
    Ok((tags, unknown))
}

/// Combines per-attribute flags into per-frame sets. Frames with no real tag
/// get `NaN`.
pub fn assemble_attributes(tags: &BTreeMap<Attribute, Vec<bool>>, frames: usize) -> Vec<AttributeSet> {
    (0..frames)
        .map(|i| {
            let mut set: AttributeSet = tags
                .iter()
                .filter(|(_, flags)| flags[i])
                .map(|(a, _)| *a)
                .collect();
            if set.is_empty() {
                set.insert(Attribute::NaN);
            }
            set
        })
        .collect()
}

fn read_groundtruth(dir: &Path) -> Result<Vec<Option<crate::geometry::BoundingBox>>, IngestError> {
    let path = dir.join(GROUNDTRUTH_FILE);
    let text = fs::read_to_string(&path).map_err(|e| IngestError::io(&path, e))?;
    text::parse_groundtruth(&text).map_err(|source| IngestError::Parse { path, source })
}

fn frame_files(dir: &Path) -> Result<(Vec<PathBuf>, Vec<PathBuf>), IngestError> {
    let color_dir = dir.join("color");
    let depth_dir = dir.join("depth");
    if !color_dir.is_dir() {
        return Err(IngestError::invalid(&color_dir, "missing color directory"));
    }
    if !depth_dir.is_dir() {
        return Err(IngestError::invalid(&depth_dir, "missing depth directory"));
    }
    Ok((list_files(&color_dir)?, list_files(&depth_dir)?))
}

/// Annotation-only load: ground truth and tags, no pixel decoding.
/// Resolution comes from `dataset.json` when given, else from the first
/// color image header.
pub fn load_annotations(dir: &Path, meta: Option<&DatasetMeta>) -> Result<Sequence, IngestError> {
    let boxes = read_groundtruth(dir)?;
    let (tags, _) = read_tags(dir, boxes.len())?;
    let attrs = assemble_attributes(&tags, boxes.len());
    let frames = boxes
        .into_iter()
        .zip(attrs)
        .map(|(target, attributes)| FrameTruth { target, attributes })
        .collect();
    let (resolution, fps) = match meta {
        Some(m) => (m.resolution, m.fps),
        None => {
            let first = list_files(&dir.join("color"))
                .ok()
                .and_then(|files| files.into_iter().next());
            let res = first
                .and_then(|p| image::image_dimensions(p).ok())
                .unwrap_or((0, 0));
            (res, DEFAULT_FRAME_RATE)
        }
    };
    Ok(Sequence::new(dir_name(dir), frames, resolution, fps)?)
}

/// Loads one sequence with lazily decoded frames.
pub fn load_sequence(dir: &Path) -> Result<(Sequence, DiskFrames), IngestError> {
    let (color, depth) = frame_files(dir)?;
    let meta = dir.parent().map(read_dataset_meta).transpose()?.flatten();
    let mut seq = load_annotations(dir, meta.as_ref())?;
    if color.len() != seq.len() || depth.len() != seq.len() {
        return Err(IngestError::invalid(
            dir,
            format!(
                "frame counts differ: color {}, depth {}, groundtruth {}",
                color.len(),
                depth.len(),
                seq.len()
            ),
        ));
    }
    if meta.is_none() {
        let first = &color[0];
        seq.resolution = image::image_dimensions(first)
            .map_err(|e| IngestError::invalid(first, e.to_string()))?;
    }
    Ok((seq, DiskFrames { color, depth }))
}

/// Annotations of every sequence under `root`, sorted by name.
pub fn load_dataset_annotations(root: &Path) -> Result<Vec<Sequence>, IngestError> {
    let meta = read_dataset_meta(root)?;
    sequence_dirs(root)?
        .par_iter()
        .map(|d| load_annotations(d, meta.as_ref()))
        .collect()
}

struct Checker {
    sequence: String,
    findings: Vec<Finding>,
}

impl Checker {
    fn push(&mut self, frame: Option<usize>, severity: Severity, message: impl Into<String>) {
        self.findings.push(Finding {
            sequence: self.sequence.clone(),
            frame,
            severity,
            message: message.into(),
        });
    }

    fn error(&mut self, frame: Option<usize>, message: impl Into<String>) {
        self.push(frame, Severity::Error, message);
    }

    fn warn(&mut self, frame: Option<usize>, message: impl Into<String>) {
        self.push(frame, Severity::Warning, message);
    }
}

fn validate_sequence(dir: &Path, expected: (u32, u32)) -> Vec<Finding> {
    let mut c = Checker {
        sequence: dir_name(dir),
        findings: Vec::new(),
    };

    let boxes = match read_groundtruth(dir) {
        Ok(b) => Some(b),
        Err(e) => {
            c.error(None, format!("groundtruth: {e}"));
            None
        }
    };
    if let Some(boxes) = &boxes {
        if boxes.is_empty() {
            c.error(None, "groundtruth has no frames");
        } else if boxes[0].is_none() {
            c.error(Some(0), "frame 0 target absent");
        }
        match read_tags(dir, boxes.len()) {
            Ok((_, unknown)) => {
                for name in unknown {
                    c.warn(None, format!("unknown attribute tag file {name}.tag"));
                }
            }
            Err(e) => c.error(None, format!("attribute tags: {e}")),
        }
    }

    let mut color = Vec::new();
    let mut depth = Vec::new();
    for (sub, exts, out) in [("color", &["jpg", "jpeg"][..], &mut color), ("depth", &["png"][..], &mut depth)] {
        let d = dir.join(sub);
        if !d.is_dir() {
            c.error(None, format!("missing {sub} directory"));
            continue;
        }
        match list_files(&d) {
            Ok(files) => {
                for f in files {
                    if has_ext(&f, exts) {
                        out.push(f);
                    } else {
                        c.error(None, format!("unsupported {sub} file {}", dir_name(&f)));
                    }
                }
            }
            Err(e) => c.error(None, e.to_string()),
        }
    }

    if let Some(boxes) = &boxes {
        if color.len() != boxes.len() || depth.len() != boxes.len() {
            c.error(
                None,
                format!(
                    "frame count mismatch: color {}, depth {}, groundtruth {}",
                    color.len(),
                    depth.len(),
                    boxes.len()
                ),
            );
        }
    }

    let mut resolution: Option<(u32, u32)> = None;
    for (i, path) in color.iter().enumerate() {
        match decode(path, ImageFormat::Jpeg) {
            Ok(DynamicImage::ImageRgb8(img)) => {
                let dims = img.dimensions();
                match resolution {
                    None => resolution = Some(dims),
                    Some(r) if r != dims => c.error(
                        Some(i),
                        format!("color resolution {}x{} differs from {}x{}", dims.0, dims.1, r.0, r.1),
                    ),
                    _ => {}
                }
            }
            Ok(other) => c.error(Some(i), format!("color image is {:?}, expected 8-bit RGB", other.color())),
            Err(e) => c.error(Some(i), format!("color decode failed: {e}")),
        }
    }
    for (i, path) in depth.iter().enumerate() {
        match decode(path, ImageFormat::Png) {
            Ok(img) => {
                let bits = img.color().bits_per_pixel() / img.color().channel_count() as u16;
                if img.color().channel_count() != 1 {
                    c.error(Some(i), format!("depth image has {} channels, expected 1", img.color().channel_count()));
                } else if bits != 16 {
                    c.error(Some(i), format!("depth bit depth {bits} ≠ 16"));
                }
                if let Some(r) = resolution {
                    let (w, h) = (img.width(), img.height());
                    if (w, h) != r {
                        c.error(Some(i), format!("depth resolution {w}x{h} differs from color {}x{}", r.0, r.1));
                    }
                }
            }
            Err(e) => c.error(Some(i), format!("depth decode failed: {e}")),
        }
    }

    if let Some((w, h)) = resolution {
        if (w, h) != expected {
            c.warn(
                None,
                format!("resolution {w}x{h} differs from declared {}x{}", expected.0, expected.1),
            );
        }
        if let Some(boxes) = &boxes {
            for (i, b) in boxes.iter().enumerate() {
                if let Some(b) = b {
                    if !b.within(w as f64, h as f64) {
                        c.warn(Some(i), "box exceeds image bounds");
                    }
                }
            }
        }
    }
    c.findings
}

/// Checks every sequence under `root`. Only an unreadable root is an error;
/// per-file problems become findings.
pub fn validate_dataset(root: &Path) -> Result<ValidationReport, IngestError> {
    let meta = match read_dataset_meta(root) {
        Ok(m) => m,
        Err(e) => {
            return Ok(ValidationReport {
                findings: vec![Finding {
                    sequence: String::new(),
                    frame: None,
                    severity: Severity::Error,
                    message: e.to_string(),
                }],
            })
        }
    };
    let expected = meta.map(|m| m.resolution).unwrap_or(DEFAULT_RESOLUTION);
    let dirs = sequence_dirs(root)?;
    let mut report = ValidationReport {
        findings: dirs
            .par_iter()
            .flat_map_iter(|d| validate_sequence(d, expected))
            .collect(),
    };
    report.sort();
    Ok(report)
}

pub fn write_dataset_meta(root: &Path, meta: &DatasetMeta) -> Result<(), IngestError> {
    fs::create_dir_all(root).map_err(|e| IngestError::io(root, e))?;
    let path = root.join(DATASET_META_FILE);
    let json = serde_json::to_string_pretty(meta).expect("dataset meta serializes");
    fs::write(&path, json + "\n").map_err(|e| IngestError::io(&path, e))
}

fn frame_file_name(index: usize, ext: &str) -> String {
    format!("{:08}.{ext}", index + 1)
}

/// Writes a sequence in the standard layout. Tags are written for every
/// attribute that is set on at least one frame.
pub fn write_sequence(
    root: &Path,
    seq: &Sequence,
    rgb: &[RgbImage],
    depth: &[DepthImage],
) -> Result<PathBuf, IngestError> {
    let dir = root.join(&seq.name);
    let color_dir = dir.join("color");
    let depth_dir = dir.join("depth");
    for d in [&color_dir, &depth_dir] {
        fs::create_dir_all(d).map_err(|e| IngestError::io(d, e))?;
    }
    for (i, img) in rgb.iter().enumerate() {
        let path = color_dir.join(frame_file_name(i, "jpg"));
        let file = fs::File::create(&path).map_err(|e| IngestError::io(&path, e))?;
        let mut enc = image::codecs::jpeg::JpegEncoder::new_with_quality(std::io::BufWriter::new(file), 95);
        enc.encode_image(img)
            .map_err(|e| IngestError::invalid(&path, e.to_string()))?;
    }
    for (i, img) in depth.iter().enumerate() {
        let path = depth_dir.join(frame_file_name(i, "png"));
        img.save_with_format(&path, ImageFormat::Png)
            .map_err(|e| IngestError::invalid(&path, e.to_string()))?;
    }
    let gt_path = dir.join(GROUNDTRUTH_FILE);
    fs::write(&gt_path, text::format_groundtruth(&seq.targets())).map_err(|e| IngestError::io(&gt_path, e))?;
    for a in Attribute::TAGGED {
        let flags: Vec<bool> = seq.frames.iter().map(|f| f.attributes.contains(a)).collect();
        if flags.iter().any(|&f| f) {
            let path = dir.join(format!("{a}.tag"));
            fs::write(&path, text::format_attribute_tags(&flags)).map_err(|e| IngestError::io(&path, e))?;
        }
    }
    Ok(dir)
}

pub fn read_run_meta(tracker_dir: &Path) -> Result<RunMeta, IngestError> {
    let path = tracker_dir.join(RUN_META_FILE);
    if !path.exists() {
        return Ok(RunMeta::default());
    }
    let text = fs::read_to_string(&path).map_err(|e| IngestError::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| IngestError::invalid(&path, e.to_string()))
}

/// Reads `<tracker_dir>/*.txt` as one run named after the directory.
pub fn read_tracker_run(tracker_dir: &Path) -> Result<TrackerRun, IngestError> {
    if !tracker_dir.is_dir() {
        return Err(IngestError::invalid(tracker_dir, "results directory not found"));
    }
    let mut run = TrackerRun::new(dir_name(tracker_dir));
    for path in list_files(tracker_dir)? {
        if !has_ext(&path, &["txt"]) {
            continue;
        }
        let text = fs::read_to_string(&path).map_err(|e| IngestError::io(&path, e))?;
        let outputs = text::parse_tracker_output(&text)
            .map_err(|source| IngestError::Parse { path: path.clone(), source })?;
        let name = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
        run.sequences.insert(name, outputs);
    }
    run.fps = read_run_meta(tracker_dir)?.fps;
    Ok(run)
}

/// Tracker directories under a results root, sorted by name.
pub fn tracker_dirs(results_root: &Path) -> Result<Vec<PathBuf>, IngestError> {
    sequence_dirs(results_root)
}

/// Writes `<results_root>/<tracker>/`. `meta.json` is written only when
/// there is something to put in it.
pub fn write_tracker_run(results_root: &Path, run: &TrackerRun, meta: &RunMeta) -> Result<PathBuf, IngestError> {
    let dir = results_root.join(&run.tracker);
    fs::create_dir_all(&dir).map_err(|e| IngestError::io(&dir, e))?;
    for (name, outputs) in &run.sequences {
        let path = dir.join(format!("{name}.txt"));
        fs::write(&path, text::format_tracker_output(outputs)).map_err(|e| IngestError::io(&path, e))?;
    }
    let meta = RunMeta {
        fps: run.fps.or(meta.fps),
        ..meta.clone()
    };
    if meta != RunMeta::default() {
        let path = dir.join(RUN_META_FILE);
        let json = serde_json::to_string_pretty(&meta).expect("run meta serializes");
        fs::write(&path, json + "\n").map_err(|e| IngestError::io(&path, e))?;
    }
    Ok(dir)
}
