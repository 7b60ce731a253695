//! Flat `key = value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Keys may appear only
//! once. Values keep interior whitespace but are trimmed at both ends.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::fusion::{FusionOp, Modality, TrackerConfig};
use crate::synth::{SimMode, SimTrackerSpec, SuiteKind};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("key `{key}`: {message}")]
    Value { key: String, message: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

/// Parsed key/value pairs in key order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues {
    pub entries: BTreeMap<String, String>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let syntax = |message: String| ConfigError::Syntax { line: i + 1, message };
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| syntax("expected `key = value`".into()))?;
            let k = k.trim();
            if k.is_empty() {
                return Err(syntax("empty key".into()));
            }
            if entries.insert(k.to_string(), v.trim().to_string()).is_some() {
                return Err(syntax(format!("duplicate key `{k}`")));
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Errors on any key outside `known`.
    pub fn check_keys(&self, known: &[&str]) -> Result<(), ConfigError> {
        match self.entries.keys().find(|k| !known.contains(&k.as_str())) {
            Some(k) => Err(ConfigError::UnknownKey(k.clone())),
            None => Ok(()),
        }
    }

    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.parse::<T>().map_err(|e| ConfigError::Value {
                    key: key.into(),
                    message: e.to_string(),
                })
            })
            .transpose()
    }

    /// Comma-separated list.
    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(|t| {
                        t.trim().parse::<T>().map_err(|e| ConfigError::Value {
                            key: key.into(),
                            message: format!("`{}`: {e}", t.trim()),
                        })
                    })
                    .collect()
            })
            .transpose()
    }
}

pub const TRACKER_KEYS: &[&str] = &[
    "name",
    "fusion",
    "weights",
    "modality",
    "search-scale",
    "presence-threshold",
    "scale-steps",
];

/// Tracker settings plus an optional run name.
pub fn tracker_config(kv: &KeyValues) -> Result<(TrackerConfig, Option<String>), ConfigError> {
    kv.check_keys(TRACKER_KEYS)?;
    let mut c = TrackerConfig::default();
    if let Some(f) = kv.parsed::<FusionOp>("fusion")? {
        c.fusion = f;
    }
    if let Some(w) = kv.list::<f64>("weights")? {
        match c.fusion {
            FusionOp::Weighted(_) => c.fusion = FusionOp::Weighted(w),
            _ => {
                return Err(ConfigError::Value {
                    key: "weights".into(),
                    message: "only valid with `fusion = weighted`".into(),
                })
            }
        }
    }
    if let Some(m) = kv.parsed::<Modality>("modality")? {
        c.modality = m;
    }
    if let Some(s) = kv.parsed("search-scale")? {
        c.search_scale = s;
    }
    if let Some(t) = kv.parsed("presence-threshold")? {
        c.presence_threshold = t;
    }
    if let Some(s) = kv.list("scale-steps")? {
        c.scale_steps = s;
    }
    c.validate().map_err(|e| ConfigError::Value {
        key: "tracker".into(),
        message: e.to_string(),
    })?;
    Ok((c, kv.get("name").map(str::to_string)))
}

pub const SYNTH_KEYS: &[&str] = &["suite", "sequences", "frames", "seed", "simulate"];

/// What `synth` should generate.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub suite: SuiteKind,
    pub sequences: usize,
    pub frames: usize,
    pub seed: u64,
    /// Simulated trackers whose runs are written next to the dataset.
    pub simulate: Vec<(String, SimTrackerSpec)>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            suite: SuiteKind::Standard,
            sequences: 5,
            frames: 100,
            seed: 0,
            simulate: Vec::new(),
        }
    }
}

pub fn synth_config(kv: &KeyValues) -> Result<SynthConfig, ConfigError> {
    kv.check_keys(SYNTH_KEYS)?;
    let mut c = SynthConfig::default();
    if let Some(s) = kv.parsed("suite")? {
        c.suite = s;
    }
    if let Some(n) = kv.parsed("sequences")? {
        c.sequences = n;
    }
    if let Some(n) = kv.parsed("frames")? {
        c.frames = n;
    }
    if let Some(s) = kv.parsed("seed")? {
        c.seed = s;
    }
    if let Some(list) = kv.list::<String>("simulate")? {
        for item in list {
            let spec = parse_sim(&item).map_err(|message| ConfigError::Value {
                key: "simulate".into(),
                message,
            })?;
            c.simulate.push((sim_name(&item), spec));
        }
    }
    if c.sequences == 0 || c.frames < 2 {
        return Err(ConfigError::Value {
            key: "frames".into(),
            message: "need at least one sequence of two frames".into(),
        });
    }
    Ok(c)
}

fn sim_name(item: &str) -> String {
    format!("sim-{}", item.replace(':', "-"))
}

/// `perfect`, `constant-iou:<alpha>`, `drift:<px per frame>`, or
/// `absent-blind`.
fn parse_sim(item: &str) -> Result<SimTrackerSpec, String> {
    let (mode, arg) = match item.split_once(':') {
        Some((m, a)) => (m, Some(a)),
        None => (item, None),
    };
    let num = |a: Option<&str>| -> Result<f64, String> {
        a.ok_or_else(|| format!("`{mode}` needs a value"))?
            .parse::<f64>()
            .map_err(|e| format!("`{item}`: {e}"))
    };
    let spec = match mode {
        "perfect" => SimTrackerSpec::perfect(),
        "constant-iou" => SimTrackerSpec::constant_iou(num(arg)?, 1.0),
        "drift" => SimTrackerSpec {
            mode: SimMode::Drift(num(arg)?),
            ..SimTrackerSpec::perfect()
        },
        "absent-blind" => SimTrackerSpec {
            mode: SimMode::AbsentBlind,
            ..SimTrackerSpec::perfect()
        },
        _ => return Err(format!("unknown simulated tracker `{item}`")),
    };
    spec.validate().map_err(|e| e.to_string())?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_whitespace() {
        let kv = KeyValues::parse("# tracker\n\nfusion = weighted\n  weights=0.3 , 0.7,0.5,0.5,0.5,0.5 \n").unwrap();
        assert_eq!(kv.get("fusion"), Some("weighted"));
        let (c, name) = tracker_config(&kv).unwrap();
        assert_eq!(c.fusion, FusionOp::Weighted(vec![0.3, 0.7, 0.5, 0.5, 0.5, 0.5]));
        assert_eq!(name, None);
    }

    #[test]
    fn reports_line_numbers() {
        let e = KeyValues::parse("a = 1\nbroken\n").unwrap_err();
        assert!(matches!(e, ConfigError::Syntax { line: 2, .. }));
        let e = KeyValues::parse("a = 1\na = 2\n").unwrap_err();
        assert!(matches!(e, ConfigError::Syntax { line: 2, .. }));
    }

    #[test]
    fn rejects_bad_tracker_values() {
        let bad = |t: &str| tracker_config(&KeyValues::parse(t).unwrap()).is_err();
        assert!(bad("fusion = min"));
        assert!(bad("weights = 0.5"));
        assert!(bad("fusion = weighted\nweights = 0.5, 0.5"));
        assert!(bad("presence-threshold = 1.5"));
        assert!(bad("scale-steps = 1.0, -1"));
        assert!(bad("colour = red"));
        let (c, name) = tracker_config(&KeyValues::parse("modality = d-only\nname = mine\nscale-steps = 1").unwrap()).unwrap();
        assert_eq!((c.modality, c.scale_steps, name.as_deref()), (Modality::Depth, vec![1.0], Some("mine")));
    }

    #[test]
    fn synth_settings() {
        let kv = KeyValues::parse("suite = camouflage\nsequences = 3\nframes = 40\nseed = 9\nsimulate = perfect, constant-iou:0.5").unwrap();
        let c = synth_config(&kv).unwrap();
        assert_eq!((c.suite, c.sequences, c.frames, c.seed), (SuiteKind::Camouflage, 3, 40, 9));
        let names: Vec<_> = c.simulate.iter().map(|(n, _)| n.as_str()).collect();
        assert_eq!(names, ["sim-perfect", "sim-constant-iou-0.5"]);
        assert!(synth_config(&KeyValues::parse("simulate = constant-iou:2").unwrap()).is_err());
        assert!(synth_config(&KeyValues::parse("frames = 1").unwrap()).is_err());
    }
}
