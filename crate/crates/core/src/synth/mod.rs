//! Deterministic synthetic RGBD data and simulated trackers.

mod scene;
mod sim;
mod suite;

use std::path::Path;

use thiserror::Error;

use crate::ingest::{self, DatasetMeta, IngestError};
use crate::metrics::MetricsError;

pub use scene::{
    generate_sequence, AxisPath, BackgroundSpec, DistractorSpec, MotionPath, NoiseSpec, SceneSpec, Shape,
    SyntheticSequence, TargetSpec, CLUTTER_CAMOUFLAGE, DARK_SCENE_ILLUMINATION, DEPTH_CHANGE_MM_PER_FRAME,
};
pub use sim::{expected_metrics, iou_shift, simulate_run, simulate_tracker, SimMode, SimTrackerSpec};
pub use suite::{suite_specs, SuiteKind, DEFAULT_RESOLUTION};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("frame {frame}: IoU {alpha} cannot be realized against a zero-area truth box")]
    UnreachableIoU { frame: usize, alpha: f64 },
    #[error("no closed form for this tracker mode")]
    Unsupported,
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
}

/// Generates every named spec.
pub fn generate_suite(specs: &[(String, SceneSpec)]) -> Result<Vec<SyntheticSequence>, SynthError> {
    use rayon::prelude::*;
    specs.par_iter().map(|(name, spec)| generate_sequence(name, spec)).collect()
}

/// Writes sequences in the standard dataset layout, plus `dataset.json`.
pub fn write_dataset(root: &Path, sequences: &[SyntheticSequence]) -> Result<(), SynthError> {
    let resolution = sequences
        .first()
        .map(|s| s.sequence.resolution)
        .unwrap_or(DEFAULT_RESOLUTION);
    ingest::write_dataset_meta(root, &DatasetMeta { resolution, fps: 30.0 })?;
    for s in sequences {
        ingest::write_sequence(root, &s.sequence, &s.frames.rgb, &s.frames.depth)?;
    }
    Ok(())
}
