//! Dataset, annotation, and tracker-result ingestion.

mod dataset;
mod frames;
pub mod text;

pub use dataset::*;
pub use frames::{DepthImage, DiskFrames, FrameError, FrameSource, MemoryFrames};
pub use text::ParseError;
