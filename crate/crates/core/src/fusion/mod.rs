//! Template-matching tracker over RGB, depth, and fused feature maps.

mod features;
mod fuse;
mod ncc;
mod tracker;

use thiserror::Error;

use crate::ingest::FrameError;

pub use features::{extract_depth, extract_rgb, FeatureMap, Region, CHANNELS, NORM_EPS};
pub use fuse::{fuse, fuse_raw, FusionOp, DEFAULT_RGB_WEIGHT};
pub use ncc::{ncc_map, ScoreMap};
pub use tracker::{Modality, TrackState, Tracker, TrackerConfig};

#[derive(Debug, Error)]
pub enum FusionError {
    #[error("region has no pixels inside the frame")]
    EmptyRegion,
    #[error("feature maps differ in shape")]
    ShapeMismatch,
    #[error("expected 1 or {expected} fusion weights, found {found}")]
    BadWeights { expected: usize, found: usize },
    #[error("invalid tracker configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Frame(#[from] FrameError),
}
