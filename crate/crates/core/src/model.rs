//! Ground-truth, prediction, attribute, and run types shared by every module.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::BoundingBox;

/// Per-frame scene attribute. `NaN` is the label given to frames that carry
/// none of the fourteen real tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Attribute {
    AC,
    BC,
    DC,
    FM,
    DS,
    FO,
    CM,
    ND,
    OP,
    OF,
    PO,
    RT,
    SC,
    SO,
    NaN,
}

impl Attribute {
    /// Fixed presentation order, real tags first and `NaN` last.
    pub const ALL: [Attribute; 15] = [
        Attribute::AC,
        Attribute::BC,
        Attribute::DC,
        Attribute::FM,
        Attribute::DS,
        Attribute::FO,
        Attribute::CM,
        Attribute::ND,
        Attribute::OP,
        Attribute::OF,
        Attribute::PO,
        Attribute::RT,
        Attribute::SC,
        Attribute::SO,
        Attribute::NaN,
    ];

    /// The fourteen tags that can appear in `<ATTR>.tag` files.
    pub const TAGGED: [Attribute; 14] = [
        Attribute::AC,
        Attribute::BC,
        Attribute::DC,
        Attribute::FM,
        Attribute::DS,
        Attribute::FO,
        Attribute::CM,
        Attribute::ND,
        Attribute::OP,
        Attribute::OF,
        Attribute::PO,
        Attribute::RT,
        Attribute::SC,
        Attribute::SO,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Attribute::AC => "AC",
            Attribute::BC => "BC",
            Attribute::DC => "DC",
            Attribute::FM => "FM",
            Attribute::DS => "DS",
            Attribute::FO => "FO",
            Attribute::CM => "CM",
            Attribute::ND => "ND",
            Attribute::OP => "OP",
            Attribute::OF => "OF",
            Attribute::PO => "PO",
            Attribute::RT => "RT",
            Attribute::SC => "SC",
            Attribute::SO => "SO",
            Attribute::NaN => "NaN",
        }
    }

    fn bit(self) -> u16 {
        1 << (self as u16)
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown attribute code `{0}`")]
pub struct UnknownAttribute(pub String);

impl FromStr for Attribute {
    type Err = UnknownAttribute;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Attribute::ALL
            .iter()
            .copied()
            .find(|a| a.code() == s)
            .ok_or_else(|| UnknownAttribute(s.to_string()))
    }
}

/// Small bit set over [`Attribute`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct AttributeSet(u16);

impl AttributeSet {
    pub const fn empty() -> Self {
        Self(0)
    }

    pub fn insert(&mut self, a: Attribute) {
        self.0 |= a.bit();
    }

    pub fn contains(&self, a: Attribute) -> bool {
        self.0 & a.bit() != 0
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    /// Membership as seen by attribute analysis: an empty set counts as `{NaN}`.
    pub fn analysis_contains(&self, a: Attribute) -> bool {
        if self.is_empty() {
            a == Attribute::NaN
        } else {
            self.contains(a)
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Attribute> + '_ {
        Attribute::ALL.into_iter().filter(|a| self.contains(*a))
    }
}

impl FromIterator<Attribute> for AttributeSet {
    fn from_iter<I: IntoIterator<Item = Attribute>>(iter: I) -> Self {
        let mut s = Self::empty();
        for a in iter {
            s.insert(a);
        }
        s
    }
}

impl Serialize for AttributeSet {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for AttributeSet {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let v = Vec::<Attribute>::deserialize(deserializer)?;
        Ok(v.into_iter().collect())
    }
}

/// Ground truth of one frame. `target == None` means the target is not visible.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FrameTruth {
    pub target: Option<BoundingBox>,
    pub attributes: AttributeSet,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OutputError {
    #[error("score {0} outside [0, 1]")]
    ScoreOutOfRange(f64),
    #[error("prediction box is not finite")]
    NonFiniteBox,
}

/// What a tracker reports for one frame: a box and its presence confidence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackerFrameOutput {
    pub bbox: BoundingBox,
    pub score: f64,
}

impl TrackerFrameOutput {
    pub fn new(bbox: BoundingBox, score: f64) -> Result<Self, OutputError> {
        if !(0.0..=1.0).contains(&score) {
            return Err(OutputError::ScoreOutOfRange(score));
        }
        if !(bbox.x.is_finite() && bbox.y.is_finite() && bbox.w.is_finite() && bbox.h.is_finite()) {
            return Err(OutputError::NonFiniteBox);
        }
        Ok(Self { bbox, score })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SequenceError {
    #[error("sequence `{0}` has no frames")]
    Empty(String),
    #[error("sequence `{0}` has no visible target in frame 0")]
    NoInitialTarget(String),
}

/// Annotated sequence. Pixel data lives elsewhere (see `ingest::FrameSource`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sequence {
    pub name: String,
    pub frames: Vec<FrameTruth>,
    pub resolution: (u32, u32),
    pub frame_rate: f64,
}

impl Sequence {
    pub fn new(
        name: impl Into<String>,
        frames: Vec<FrameTruth>,
        resolution: (u32, u32),
        frame_rate: f64,
    ) -> Result<Self, SequenceError> {
        let name = name.into();
        match frames.first() {
            None => return Err(SequenceError::Empty(name)),
            Some(f) if f.target.is_none() => return Err(SequenceError::NoInitialTarget(name)),
            _ => {}
        }
        Ok(Self {
            name,
            frames,
            resolution,
            frame_rate,
        })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn targets(&self) -> Vec<Option<BoundingBox>> {
        self.frames.iter().map(|f| f.target).collect()
    }

    /// Frame 0 ground truth; always present by construction.
    pub fn init_box(&self) -> BoundingBox {
        self.frames[0].target.expect("frame 0 target checked at construction")
    }
}

/// A tracker's outputs over a dataset, keyed by sequence name.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrackerRun {
    pub tracker: String,
    pub sequences: BTreeMap<String, Vec<TrackerFrameOutput>>,
    /// Wall-clock speed when it was measured.
    pub fps: Option<f64>,
}

impl TrackerRun {
    pub fn new(tracker: impl Into<String>) -> Self {
        Self {
            tracker: tracker.into(),
            ..Default::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn attribute_codes_round_trip() {
        for a in Attribute::ALL {
            assert_eq!(a.code().parse::<Attribute>().unwrap(), a);
        }
        assert!("DF".parse::<Attribute>().is_err());
        assert!("ac".parse::<Attribute>().is_err());
        assert_eq!(Attribute::ALL.len(), 15);
    }

    #[test]
    fn empty_set_is_nan_for_analysis() {
        let s = AttributeSet::empty();
        assert!(s.analysis_contains(Attribute::NaN));
        assert!(!s.analysis_contains(Attribute::DS));
        let t: AttributeSet = [Attribute::DS, Attribute::SO].into_iter().collect();
        assert!(!t.analysis_contains(Attribute::NaN));
        assert_eq!(t.iter().collect::<Vec<_>>(), vec![Attribute::DS, Attribute::SO]);
    }

    #[test]
    fn sequence_requires_visible_first_frame() {
        let vis = FrameTruth {
            target: Some(BoundingBox::new(0., 0., 1., 1.).unwrap()),
            attributes: AttributeSet::empty(),
        };
        assert!(Sequence::new("a", vec![], (4, 4), 30.0).is_err());
        assert_eq!(
            Sequence::new("a", vec![FrameTruth::default(), vis.clone()], (4, 4), 30.0),
            Err(SequenceError::NoInitialTarget("a".into()))
        );
        assert_eq!(Sequence::new("a", vec![vis], (4, 4), 30.0).unwrap().len(), 1);
    }

    #[test]
    fn output_score_range() {
        let b = BoundingBox::new(0., 0., 1., 1.).unwrap();
        assert!(TrackerFrameOutput::new(b, 1.0).is_ok());
        assert!(TrackerFrameOutput::new(b, 0.0).is_ok());
        assert_eq!(TrackerFrameOutput::new(b, 1.5), Err(OutputError::ScoreOutOfRange(1.5)));
        assert!(TrackerFrameOutput::new(b, f64::NAN).is_err());
    }
}
