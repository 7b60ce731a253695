use std::path::{Path, PathBuf};

use image::{DynamicImage, ImageBuffer, ImageFormat, ImageReader, Luma, RgbImage};
use thiserror::Error;

/// Single-channel 16-bit depth in millimeters; 0 marks an invalid pixel.
pub type DepthImage = ImageBuffer<Luma<u16>, Vec<u16>>;

#[derive(Debug, Error)]
pub enum FrameError {
    #[error("frame {0} out of range")]
    OutOfRange(usize),
    #[error("{path}: {message}")]
    Decode { path: PathBuf, message: String },
}

/// Random access to the pixels of one sequence.
pub trait FrameSource: Sync {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn rgb(&self, index: usize) -> Result<RgbImage, FrameError>;

    fn depth(&self, index: usize) -> Result<DepthImage, FrameError>;
}

/// Frames kept in memory, as produced by the synthetic generator.
#[derive(Debug, Clone, Default)]
pub struct MemoryFrames {
    pub rgb: Vec<RgbImage>,
    pub depth: Vec<DepthImage>,
}

impl FrameSource for MemoryFrames {
    fn len(&self) -> usize {
        self.rgb.len()
    }

    fn rgb(&self, index: usize) -> Result<RgbImage, FrameError> {
        self.rgb.get(index).cloned().ok_or(FrameError::OutOfRange(index))
    }

    fn depth(&self, index: usize) -> Result<DepthImage, FrameError> {
        self.depth.get(index).cloned().ok_or(FrameError::OutOfRange(index))
    }
}

/// Frame files on disk, decoded on demand.
#[derive(Debug, Clone)]
pub struct DiskFrames {
    pub color: Vec<PathBuf>,
    pub depth: Vec<PathBuf>,
}

impl FrameSource for DiskFrames {
    fn len(&self) -> usize {
        self.color.len()
    }

    fn rgb(&self, index: usize) -> Result<RgbImage, FrameError> {
        let path = self.color.get(index).ok_or(FrameError::OutOfRange(index))?;
        match decode(path, ImageFormat::Jpeg)? {
            DynamicImage::ImageRgb8(img) => Ok(img),
            other => Err(FrameError::Decode {
                path: path.clone(),
                message: format!("expected 8-bit RGB, found {:?}", other.color()),
            }),
        }
    }

    fn depth(&self, index: usize) -> Result<DepthImage, FrameError> {
        let path = self.depth.get(index).ok_or(FrameError::OutOfRange(index))?;
        match decode(path, ImageFormat::Png)? {
            DynamicImage::ImageLuma16(img) => Ok(img),
            other => Err(FrameError::Decode {
                path: path.clone(),
                message: format!("expected 16-bit grayscale, found {:?}", other.color()),
            }),
        }
    }
}

/// Decodes `path`, requiring the content to be `format`.
pub(crate) fn decode(path: &Path, format: ImageFormat) -> Result<DynamicImage, FrameError> {
    let err = |message: String| FrameError::Decode {
        path: path.to_path_buf(),
        message,
    };
    let reader = ImageReader::open(path)
        .map_err(|e| err(e.to_string()))?
        .with_guessed_format()
        .map_err(|e| err(e.to_string()))?;
    match reader.format() {
        Some(f) if f == format => {}
        found => return Err(err(format!("expected {format:?} content, found {found:?}"))),
    }
    reader.decode().map_err(|e| err(e.to_string()))
}
