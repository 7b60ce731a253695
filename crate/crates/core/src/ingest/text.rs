//! Line-oriented annotation and result formats.
//!
//! * `groundtruth.txt`: `x,y,w,h` per frame, `nan,nan,nan,nan` when the
//!   target is absent.
//! * `<ATTR>.tag`: one `0` or `1` per frame.
//! * `<sequence>.txt` results: `x,y,w,h,score` per frame.

use std::fmt::Write as _;

use thiserror::Error;

use crate::geometry::BoundingBox;
use crate::model::TrackerFrameOutput;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("line {0}: malformed")]
    MalformedLine(usize),
    #[error("line {line}: negative box size")]
    NegativeSize { line: usize },
    #[error("line {line}: score {value} outside [0, 1]")]
    ScoreOutOfRange { line: usize, value: f64 },
    #[error("expected {expected} lines, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("input is not valid UTF-8")]
    InvalidUtf8,
}

/// Splits content into lines, tolerating CRLF and one trailing newline.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    let body = text.strip_suffix('\n').unwrap_or(text);
    let empty = body.is_empty() && text.is_empty();
    body.split('\n')
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(move |_| !empty)
}

fn finite(tok: &str, line: usize) -> Result<f64, ParseError> {
    match tok.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(ParseError::MalformedLine(line)),
    }
}

fn is_nan_token(tok: &str) -> bool {
    tok.trim().eq_ignore_ascii_case("nan")
}

fn parse_box(tokens: &[&str], line: usize) -> Result<BoundingBox, ParseError> {
    let x = finite(tokens[0], line)?;
    let y = finite(tokens[1], line)?;
    let w = finite(tokens[2], line)?;
    let h = finite(tokens[3], line)?;
    if w < 0.0 || h < 0.0 {
        return Err(ParseError::NegativeSize { line });
    }
    Ok(BoundingBox { x, y, w, h })
}

pub fn parse_groundtruth(text: &str) -> Result<Vec<Option<BoundingBox>>, ParseError> {
    lines(text)
        .map(|(n, l)| {
            let tokens: Vec<&str> = l.split(',').collect();
            if tokens.len() != 4 {
                return Err(ParseError::MalformedLine(n));
            }
            if tokens.iter().all(|t| is_nan_token(t)) {
                Ok(None)
            } else {
                parse_box(&tokens, n).map(Some)
            }
        })
        .collect()
}

pub fn parse_groundtruth_bytes(bytes: &[u8]) -> Result<Vec<Option<BoundingBox>>, ParseError> {
    parse_groundtruth(std::str::from_utf8(bytes).map_err(|_| ParseError::InvalidUtf8)?)
}

/// Parses one attribute's tag file. `None` stands for a missing file and
/// yields all-false flags.
pub fn parse_attribute_tags(text: Option<&str>, frames: usize) -> Result<Vec<bool>, ParseError> {
    let Some(text) = text else {
        return Ok(vec![false; frames]);
    };
    let flags = lines(text)
        .map(|(n, l)| match l.trim() {
            "0" => Ok(false),
            "1" => Ok(true),
            _ => Err(ParseError::MalformedLine(n)),
        })
        .collect::<Result<Vec<_>, _>>()?;
    if flags.len() != frames {
        return Err(ParseError::LengthMismatch {
            expected: frames,
            found: flags.len(),
        });
    }
    Ok(flags)
}

pub fn parse_attribute_tags_bytes(bytes: &[u8], frames: usize) -> Result<Vec<bool>, ParseError> {
    let text = std::str::from_utf8(bytes).map_err(|_| ParseError::InvalidUtf8)?;
    parse_attribute_tags(Some(text), frames)
}

pub fn parse_tracker_output(text: &str) -> Result<Vec<TrackerFrameOutput>, ParseError> {
    lines(text)
        .map(|(n, l)| {
            let tokens: Vec<&str> = l.split(',').collect();
            if tokens.len() != 5 {
                return Err(ParseError::MalformedLine(n));
            }
            let bbox = parse_box(&tokens[..4], n)?;
            let score = finite(tokens[4], n)?;
            if !(0.0..=1.0).contains(&score) {
                return Err(ParseError::ScoreOutOfRange { line: n, value: score });
            }
            Ok(TrackerFrameOutput { bbox, score })
        })
        .collect()
}

pub fn parse_tracker_output_bytes(bytes: &[u8]) -> Result<Vec<TrackerFrameOutput>, ParseError> {
    parse_tracker_output(std::str::from_utf8(bytes).map_err(|_| ParseError::InvalidUtf8)?)
}

/// Canonical ground-truth text: four decimals, lowercase `nan`.
pub fn format_groundtruth(boxes: &[Option<BoundingBox>]) -> String {
    let mut s = String::with_capacity(boxes.len() * 32);
    for b in boxes {
        match b {
            Some(b) => writeln!(s, "{:.4},{:.4},{:.4},{:.4}", b.x, b.y, b.w, b.h),
            None => writeln!(s, "nan,nan,nan,nan"),
        }
        .unwrap();
    }
    s
}

pub fn format_attribute_tags(flags: &[bool]) -> String {
    let mut s = String::with_capacity(flags.len() * 2);
    for &f in flags {
        s.push(if f { '1' } else { '0' });
        s.push('\n');
    }
    s
}

pub fn format_tracker_output(outputs: &[TrackerFrameOutput]) -> String {
    let mut s = String::with_capacity(outputs.len() * 40);
    for o in outputs {
        let b = &o.bbox;
        writeln!(s, "{:.4},{:.4},{:.4},{:.4},{:.4}", b.x, b.y, b.w, b.h, o.score).unwrap();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn groundtruth_examples() {
        assert_eq!(
            parse_groundtruth("10.0,20.0,30.0,40.0").unwrap(),
            vec![Some(BoundingBox::new(10., 20., 30., 40.).unwrap())]
        );
        assert_eq!(parse_groundtruth("nan,nan,nan,nan").unwrap(), vec![None]);
        assert_eq!(parse_groundtruth("10,20,30"), Err(ParseError::MalformedLine(1)));
    }

    #[test]
    fn groundtruth_errors() {
        assert_eq!(parse_groundtruth("1,2,-3,4"), Err(ParseError::NegativeSize { line: 1 }));
        assert_eq!(parse_groundtruth("1,2,3,4\nnan,1,2,3\n"), Err(ParseError::MalformedLine(2)));
        assert_eq!(parse_groundtruth("1,2,inf,4"), Err(ParseError::MalformedLine(1)));
        assert_eq!(parse_groundtruth("1,2,3,4\n\n5,6,7,8"), Err(ParseError::MalformedLine(2)));
        assert_eq!(parse_groundtruth("a,b,c,d"), Err(ParseError::MalformedLine(1)));
    }

    #[test]
    fn groundtruth_line_endings() {
        let v = parse_groundtruth("1,2,3,4\r\nNaN,NaN,NaN,NaN\r\n").unwrap();
        assert_eq!(v.len(), 2);
        assert!(v[1].is_none());
        assert!(parse_groundtruth("").unwrap().is_empty());
        assert_eq!(parse_groundtruth("\n"), Err(ParseError::MalformedLine(1)));
    }

    #[test]
    fn tag_examples() {
        assert_eq!(parse_attribute_tags(Some("1\n0\n1"), 3).unwrap(), vec![true, false, true]);
        assert_eq!(parse_attribute_tags(None, 3).unwrap(), vec![false; 3]);
        assert_eq!(
            parse_attribute_tags(Some("1\n0"), 3),
            Err(ParseError::LengthMismatch { expected: 3, found: 2 })
        );
        assert_eq!(parse_attribute_tags(Some("1\n2\n0"), 3), Err(ParseError::MalformedLine(2)));
    }

    #[test]
    fn tracker_output_examples() {
        let v = parse_tracker_output("5,5,10,10,0.90").unwrap();
        assert_eq!(v[0].bbox, BoundingBox::new(5., 5., 10., 10.).unwrap());
        assert_eq!(v[0].score, 0.90);
        assert_eq!(
            parse_tracker_output("5,5,10,10,1.50"),
            Err(ParseError::ScoreOutOfRange { line: 1, value: 1.5 })
        );
        let z = parse_tracker_output("0,0,0,0,0.00").unwrap();
        assert_eq!(z[0].bbox.area(), 0.0);
        assert_eq!(z[0].score, 0.0);
        assert_eq!(parse_tracker_output("1,2,3,4"), Err(ParseError::MalformedLine(1)));
    }

    #[test]
    fn invalid_utf8_is_structured() {
        assert_eq!(parse_groundtruth_bytes(&[0xff, 0xfe]), Err(ParseError::InvalidUtf8));
    }

    fn canonical_box() -> impl Strategy<Value = Option<BoundingBox>> {
        prop_oneof![
            1 => Just(None),
            4 => (-5000i64..5000, -5000i64..5000, 0i64..5000, 0i64..5000).prop_map(|(x, y, w, h)| {
                Some(BoundingBox {
                    x: x as f64 / 4.0,
                    y: y as f64 / 4.0,
                    w: w as f64 / 4.0,
                    h: h as f64 / 4.0,
                })
            }),
        ]
    }

    proptest! {
        #[test]
        fn groundtruth_canonical_round_trip(boxes in proptest::collection::vec(canonical_box(), 0..40)) {
            let text = format_groundtruth(&boxes);
            let parsed = parse_groundtruth(&text).unwrap();
            prop_assert_eq!(&parsed, &boxes);
            prop_assert_eq!(format_groundtruth(&parsed), text);
        }

        #[test]
        fn tracker_output_canonical_round_trip(
            rows in proptest::collection::vec((canonical_box(), 0u32..=10000), 0..40)
        ) {
            let outs: Vec<TrackerFrameOutput> = rows
                .into_iter()
                .map(|(b, s)| TrackerFrameOutput {
                    bbox: b.unwrap_or(BoundingBox { x: 0., y: 0., w: 0., h: 0. }),
                    score: s as f64 / 10000.0,
                })
                .collect();
            let text = format_tracker_output(&outs);
            let parsed = parse_tracker_output(&text).unwrap();
            prop_assert_eq!(format_tracker_output(&parsed), text);
        }

        #[test]
        fn parsers_never_panic(bytes in proptest::collection::vec(any::<u8>(), 0..200)) {
            let _ = parse_groundtruth_bytes(&bytes);
            let _ = parse_tracker_output_bytes(&bytes);
            let _ = parse_attribute_tags_bytes(&bytes, 3);
        }
    }
}
