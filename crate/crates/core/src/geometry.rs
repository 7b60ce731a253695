//! Axis-aligned box geometry in continuous image coordinates.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoxError {
    #[error("box field is not finite")]
    NonFinite,
    #[error("box has negative size ({w} x {h})")]
    NegativeSize { w: f64, h: f64 },
}

/// Rectangle with its origin at the top-left corner: `x` is the left edge,
/// `y` the top edge, `w`/`h` the extent in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl BoundingBox {
    /// Builds a box, rejecting non-finite fields and negative sizes.
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Result<Self, BoxError> {
        if !(x.is_finite() && y.is_finite() && w.is_finite() && h.is_finite()) {
            return Err(BoxError::NonFinite);
        }
        if w < 0.0 || h < 0.0 {
            return Err(BoxError::NegativeSize { w, h });
        }
        Ok(Self { x, y, w, h })
    }

    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn center(&self) -> (f64, f64) {
        (self.x + 0.5 * self.w, self.y + 0.5 * self.h)
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Self {
        Self {
            x: self.x + dx,
            y: self.y + dy,
            ..*self
        }
    }

    /// Box of the same center with sides multiplied by `s`.
    pub fn scaled_about_center(&self, s: f64) -> Self {
        let (cx, cy) = self.center();
        let (w, h) = (self.w * s, self.h * s);
        Self {
            x: cx - 0.5 * w,
            y: cy - 0.5 * h,
            w,
            h,
        }
    }

    /// Overlap rectangle, or `None` when the boxes do not intersect with
    /// positive area.
    pub fn intersection(&self, other: &Self) -> Option<Self> {
        let x0 = self.x.max(other.x);
        let y0 = self.y.max(other.y);
        let x1 = self.right().min(other.right());
        let y1 = self.bottom().min(other.bottom());
        if x1 > x0 && y1 > y0 {
            Some(Self {
                x: x0,
                y: y0,
                w: x1 - x0,
                h: y1 - y0,
            })
        } else {
            None
        }
    }

    /// Clip to `[0, width) x [0, height)`.
    pub fn clip_to(&self, width: f64, height: f64) -> Option<Self> {
        self.intersection(&Self {
            x: 0.0,
            y: 0.0,
            w: width,
            h: height,
        })
    }

    /// True when the box lies entirely inside a `width x height` image.
    pub fn within(&self, width: f64, height: f64) -> bool {
        self.x >= 0.0 && self.y >= 0.0 && self.right() <= width && self.bottom() <= height
    }
}

/// Intersection over union of two boxes. Zero-area unions yield 0.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    // (x + w) - x need not round back to w
    if a == b {
        return if a.area() > 0.0 { 1.0 } else { 0.0 };
    }
    let iw = a.right().min(b.right()) - a.x.max(b.x);
    let ih = a.bottom().min(b.bottom()) - a.y.max(b.y);
    let inter = if iw > 0.0 && ih > 0.0 { iw * ih } else { 0.0 };
    let union = a.area() + b.area() - inter;
    if union > 0.0 {
        (inter / union).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

/// Overlap of an (optional) prediction with (optional) ground truth; any
/// absent side scores 0.
pub fn overlap_with_truth(pred: Option<&BoundingBox>, truth: Option<&BoundingBox>) -> f64 {
    match (pred, truth) {
        (Some(p), Some(t)) => iou(p, t),
        _ => 0.0,
    }
}
