//! Line-oriented scenario configuration.
//!
//! ```text
//! # 50 agents, thresholded position-based law
//! model = p-thr
//! n = 50
//! radius = 7.5
//! ```
//!
//! One `key = value` per line; `#` starts a comment. Unknown and repeated
//! keys are rejected. Only `dim`, `dt`, `decimation`, `box` and `v_init_max`
//! have defaults; every other key is required.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

use crate::error::Result as FlockResult;
use crate::sim::sample_initial;
use crate::state::{Dim, ModelParams, SwarmState, Variant};

/// Every accepted key, in the order used when echoing a configuration.
pub const KEYS: [&str; 15] = [
    "model",
    "n",
    "dim",
    "seed",
    "t_end",
    "dt",
    "radius",
    "delta",
    "k",
    "vmax",
    "umax",
    "box",
    "v_init_max",
    "decimation",
    "out",
];

const DEFAULTS: [(&str, &str); 5] = [
    ("dim", "2"),
    ("dt", "0.05"),
    ("decimation", "1"),
    ("box", "25"),
    ("v_init_max", "1.0"),
];

/// Where a value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Flag,
    Default,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(n) => write!(f, "line {n}"),
            Origin::Flag => f.write_str("command-line flag"),
            Origin::Default => f.write_str("default"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, found `{text}`")]
    Syntax { line: usize, text: String },

    #[error("{origin}: unknown key `{key}`")]
    UnknownKey { key: String, origin: Origin },

    #[error("line {line}: key `{key}` given more than once")]
    Duplicate { key: String, line: usize },

    #[error("required key `{key}` missing")]
    Missing { key: &'static str },

    #[error("{origin}: cannot parse `{value}` for `{key}`: {reason}")]
    Value {
        key: &'static str,
        value: String,
        origin: Origin,
        reason: String,
    },

    #[error("{origin}: invariant {rule} violated for `{key}` (got {value})")]
    Invariant {
        key: &'static str,
        rule: &'static str,
        value: String,
        origin: Origin,
    },
}

impl ConfigError {
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::Syntax { .. } => None,
            ConfigError::UnknownKey { key, .. } | ConfigError::Duplicate { key, .. } => Some(key),
            ConfigError::Missing { key } | ConfigError::Value { key, .. } | ConfigError::Invariant { key, .. } => {
                Some(key)
            }
        }
    }

    pub fn line(&self) -> Option<usize> {
        let origin = match self {
            ConfigError::Syntax { line, .. } | ConfigError::Duplicate { line, .. } => return Some(*line),
            ConfigError::Missing { .. } => return None,
            ConfigError::UnknownKey { origin, .. }
            | ConfigError::Value { origin, .. }
            | ConfigError::Invariant { origin, .. } => origin,
        };
        match origin {
            Origin::Line(n) => Some(*n),
            _ => None,
        }
    }
}

/// A validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub model: Variant,
    pub n: usize,
    pub dim: Dim,
    pub seed: u64,
    pub t_end: f64,
    pub dt: f64,
    pub radius: f64,
    pub delta: f64,
    pub k: f64,
    pub vmax: f64,
    pub umax: f64,
    pub box_size: f64,
    pub v_init_max: f64,
    pub decimation: usize,
    pub out: PathBuf,
}

impl ScenarioConfig {
    pub fn params(&self) -> ModelParams {
        ModelParams {
            delta: self.delta,
            k: self.k,
            radius: self.radius,
            v_max: self.vmax,
            u_max: self.umax,
            variant: self.model,
            dt: self.dt,
            t_end: self.t_end,
        }
    }

    /// The seeded initial swarm for this scenario.
    pub fn initial_state(&self) -> FlockResult<SwarmState> {
        sample_initial(self.n, self.box_size, self.v_init_max, self.seed, self.dim)
    }

    /// `(key, value)` pairs in [`KEYS`] order; parsing them back gives `self`.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        vec![
            ("model", self.model.to_string()),
            ("n", self.n.to_string()),
            ("dim", self.dim.get().to_string()),
            ("seed", self.seed.to_string()),
            ("t_end", self.t_end.to_string()),
            ("dt", self.dt.to_string()),
            ("radius", self.radius.to_string()),
            ("delta", self.delta.to_string()),
            ("k", self.k.to_string()),
            ("vmax", self.vmax.to_string()),
            ("umax", self.umax.to_string()),
            ("box", self.box_size.to_string()),
            ("v_init_max", self.v_init_max.to_string()),
            ("decimation", self.decimation.to_string()),
            ("out", self.out.display().to_string()),
        ]
    }

    /// The configuration as a document in the accepted format.
    pub fn to_document(&self) -> String {
        self.entries()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}

/// Parses a configuration document.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    parse_config_with_overrides(text, &[])
}

/// Parses a document, then applies `overrides` (`key`, `value`) on top of it,
/// as given by `--key value` flags.
pub fn parse_config_with_overrides(text: &str, overrides: &[(String, String)]) -> Result<ScenarioConfig, ConfigError> {
    let mut raw: BTreeMap<&'static str, (String, Origin)> = BTreeMap::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Syntax {
                line: line_no,
                text: content.to_string(),
            });
        };
        let key = key.trim();
        let canonical = canonical_key(key).ok_or_else(|| ConfigError::UnknownKey {
            key: key.to_string(),
            origin: Origin::Line(line_no),
        })?;
        if raw.contains_key(canonical) {
            return Err(ConfigError::Duplicate {
                key: canonical.to_string(),
                line: line_no,
            });
        }
        raw.insert(canonical, (value.trim().to_string(), Origin::Line(line_no)));
    }
    for (key, value) in overrides {
        let canonical = canonical_key(key).ok_or_else(|| ConfigError::UnknownKey {
            key: key.clone(),
            origin: Origin::Flag,
        })?;
        raw.insert(canonical, (value.trim().to_string(), Origin::Flag));
    }
    for (key, value) in DEFAULTS {
        raw.entry(key).or_insert_with(|| (value.to_string(), Origin::Default));
    }
    Fields { raw }.build()
}

fn canonical_key(key: &str) -> Option<&'static str> {
    KEYS.iter().copied().find(|k| *k == key)
}

struct Fields {
    raw: BTreeMap<&'static str, (String, Origin)>,
}

impl Fields {
    fn get(&self, key: &'static str) -> Result<(&str, Origin), ConfigError> {
        self.raw
            .get(key)
            .map(|(v, o)| (v.as_str(), *o))
            .ok_or(ConfigError::Missing { key })
    }

    fn parse<T>(&self, key: &'static str) -> Result<(T, Origin), ConfigError>
    where
        T: std::str::FromStr,
        T::Err: fmt::Display,
    {
        let (value, origin) = self.get(key)?;
        value.parse::<T>().map(|v| (v, origin)).map_err(|e| ConfigError::Value {
            key,
            value: value.to_string(),
            origin,
            reason: e.to_string(),
        })
    }

    fn real(&self, key: &'static str, rule: &'static str, ok: impl Fn(f64) -> bool) -> Result<f64, ConfigError> {
        let (v, origin) = self.parse::<f64>(key)?;
        if v.is_finite() && ok(v) {
            Ok(v)
        } else {
            Err(ConfigError::Invariant {
                key,
                rule,
                value: v.to_string(),
                origin,
            })
        }
    }

    fn count(&self, key: &'static str, rule: &'static str, min: usize) -> Result<usize, ConfigError> {
        let (v, origin) = self.parse::<usize>(key)?;
        if v >= min {
            Ok(v)
        } else {
            Err(ConfigError::Invariant {
                key,
                rule,
                value: v.to_string(),
                origin,
            })
        }
    }

    fn dim(&self) -> Result<Dim, ConfigError> {
        let (raw, origin) = self.parse::<usize>("dim")?;
        Dim::from_usize(raw).ok_or_else(|| ConfigError::Invariant {
            key: "dim",
            rule: "dim in {2, 3}",
            value: raw.to_string(),
            origin,
        })
    }

    fn out(&self) -> Result<PathBuf, ConfigError> {
        let (out, origin) = self.get("out")?;
        if out.is_empty() {
            return Err(ConfigError::Invariant {
                key: "out",
                rule: "out is a non-empty path",
                value: String::new(),
                origin,
            });
        }
        Ok(PathBuf::from(out))
    }

    fn build(self) -> Result<ScenarioConfig, ConfigError> {
        let model = self.parse::<Variant>("model").map(|(v, _)| v);
        let n = self.count("n", "n >= 2", 2);
        let dim = self.dim();
        let seed = self.parse::<u64>("seed").map(|(v, _)| v);
        let t_end = self.real("t_end", "t_end > 0", |v| v > 0.0);
        let bound = t_end.clone().unwrap_or(f64::INFINITY);
        let dt = self.real("dt", "0 < dt <= t_end", |v| v > 0.0 && v <= bound);
        let radius = self.real("radius", "radius > 0", |v| v > 0.0);
        let delta = self.real("delta", "delta >= 0", |v| v >= 0.0);
        let k = self.real("k", "k > 0", |v| v > 0.0);
        let vmax = self.real("vmax", "vmax > 0", |v| v > 0.0);
        let umax = self.real("umax", "umax > 0", |v| v > 0.0);
        let box_size = self.real("box", "box > 0", |v| v > 0.0);
        let v_init_max = self.real("v_init_max", "v_init_max >= 0", |v| v >= 0.0);
        let decimation = self.count("decimation", "decimation >= 1", 1);
        let out = self.out();

        // A bad value outranks a missing key; within each kind the first key
        // in KEYS order is reported.
        let mut errors: Vec<ConfigError> = [
            model.as_ref().err(),
            n.as_ref().err(),
            dim.as_ref().err(),
            seed.as_ref().err(),
            t_end.as_ref().err(),
            dt.as_ref().err(),
            radius.as_ref().err(),
            delta.as_ref().err(),
            k.as_ref().err(),
            vmax.as_ref().err(),
            umax.as_ref().err(),
            box_size.as_ref().err(),
            v_init_max.as_ref().err(),
            decimation.as_ref().err(),
            out.as_ref().err(),
        ]
        .into_iter()
        .flatten()
        .cloned()
        .collect();
        if let Some(i) = errors.iter().position(|e| !matches!(e, ConfigError::Missing { .. })) {
            return Err(errors.swap_remove(i));
        }
        if !errors.is_empty() {
            return Err(errors.swap_remove(0));
        }
        Ok(ScenarioConfig {
            model: model?,
            n: n?,
            dim: dim?,
            seed: seed?,
            t_end: t_end?,
            dt: dt?,
            radius: radius?,
            delta: delta?,
            k: k?,
            vmax: vmax?,
            umax: umax?,
            box_size: box_size?,
            v_init_max: v_init_max?,
            decimation: decimation?,
            out: out?,
        })
    }
}
