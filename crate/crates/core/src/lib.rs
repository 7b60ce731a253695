//! Long-term RGBD tracking benchmark engine.
//!
//! * [`ingest`] reads datasets and tracker results, and validates them.
//! * [`metrics`] computes precision, recall, and F over confidence thresholds
//!   under sequence-based and frame-based averaging.
//! * [`synth`] renders deterministic RGBD sequences and simulated trackers
//!   whose metrics are known in closed form.
//! * [`fusion`] is a small RGB+depth template tracker with a pluggable
//!   feature-merging layer.
//! * [`report`] writes ranking tables, curves, and attribute matrices.

pub mod cli;
pub mod config;
pub mod fusion;
pub mod geometry;
pub mod ingest;
pub mod metrics;
pub mod model;
pub mod report;
pub mod synth;

pub use geometry::{iou, overlap_with_truth, BoundingBox};
pub use metrics::{evaluate, f_score, MetricsPoint, MetricsReport, PRCurve, Protocol};
pub use model::{Attribute, AttributeSet, FrameTruth, Sequence, TrackerFrameOutput, TrackerRun};
