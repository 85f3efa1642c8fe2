//! Line-oriented run configuration: `section.key = value`, `#` comments, `[a, b]` lists.
//!
//! ```text
//! experiment = sharpness
//! seed = 7
//! geometry.kind = power
//! geometry.sigma = 2
//! params.h_list = [0.0625, 0.03125, 0.015625, 0.0078125]
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::experiments::{default_params, CATALOG, SUITE};
use crate::geometry::{WarpKind, WarpProfile, POWER_MIN_R0};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_JOBS: usize = 1;
pub const DEFAULT_OUT_DIR: &str = "results";

/// A scalar or list value as written in the config file.
#[derive(Debug, Clone, PartialEq)]
pub enum ConfigValue {
    Num(f64),
    Bool(bool),
    Str(String),
    List(Vec<ConfigValue>),
}

impl ConfigValue {
    fn parse(text: &str) -> std::result::Result<Self, String> {
        let t = text.trim();
        if let Some(inner) = t.strip_prefix('[') {
            let inner = inner.strip_suffix(']').ok_or("unterminated list")?;
            if inner.trim().is_empty() {
                return Ok(Self::List(vec![]));
            }
            let items = inner.split(',').map(Self::parse_scalar).collect::<std::result::Result<_, _>>()?;
            return Ok(Self::List(items));
        }
        Self::parse_scalar(t)
    }

    fn parse_scalar(text: &str) -> std::result::Result<Self, String> {
        let t = text.trim();
        if t.is_empty() {
            return Err("empty value".into());
        }
        if t.starts_with('[') || t.ends_with(']') {
            return Err("nested lists are not supported".into());
        }
        if let Some(inner) = t.strip_prefix('"') {
            let s = inner.strip_suffix('"').ok_or("unterminated string")?;
            if s.contains('"') {
                return Err("quotes inside strings are not supported".into());
            }
            return Ok(Self::Str(s.into()));
        }
        match t {
            "true" => return Ok(Self::Bool(true)),
            "false" => return Ok(Self::Bool(false)),
            _ => {}
        }
        let starts_numeric = t.starts_with(|c: char| c.is_ascii_digit() || c == '-' || c == '+' || c == '.');
        if starts_numeric {
            return match t.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(Self::Num(v)),
                _ => Err(format!("`{t}` is not a finite number")),
            };
        }
        Ok(Self::Str(t.into()))
    }

    fn render(&self) -> String {
        match self {
            Self::Num(v) => format!("{v}"),
            Self::Bool(b) => b.to_string(),
            Self::Str(s) => format!("\"{s}\""),
            Self::List(items) => format!("[{}]", items.iter().map(|v| v.render()).collect::<Vec<_>>().join(", ")),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Self::Num(v) if v.fract() == 0.0 && v.abs() < 9.0e15 => Value::from(*v as i64),
            Self::Num(v) => Value::from(*v),
            Self::Bool(b) => Value::from(*b),
            Self::Str(s) => Value::from(s.as_str()),
            Self::List(items) => Value::Array(items.iter().map(|v| v.to_json()).collect()),
        }
    }

    fn as_num(&self) -> std::result::Result<f64, String> {
        match self {
            Self::Num(v) => Ok(*v),
            other => Err(format!("expected a number, found {}", other.render())),
        }
    }

    fn as_count(&self) -> std::result::Result<u64, String> {
        let v = self.as_num()?;
        if v >= 0.0 && v.fract() == 0.0 && v < 1.8e19 {
            Ok(v as u64)
        } else {
            Err(format!("expected a non-negative integer, found {v}"))
        }
    }

    fn as_text(&self) -> std::result::Result<String, String> {
        match self {
            Self::Str(s) => Ok(s.clone()),
            other => Err(format!("expected a string, found {}", other.render())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AngularConfig {
    pub circumferences: Vec<f64>,
    pub mu_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialConfig {
    pub rmax: Option<f64>,
    pub n: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: String,
    pub seed: u64,
    pub jobs: usize,
    pub out_dir: String,
    pub geometry: Option<WarpProfile>,
    pub angular: Option<AngularConfig>,
    pub radial: Option<RadialConfig>,
    /// Overrides of the experiment's parameter fields.
    pub params: BTreeMap<String, ConfigValue>,
}

impl RunConfig {
    pub fn new(experiment: &str) -> Self {
        Self {
            experiment: experiment.into(),
            seed: DEFAULT_SEED,
            jobs: DEFAULT_JOBS,
            out_dir: DEFAULT_OUT_DIR.into(),
            geometry: None,
            angular: None,
            radial: None,
            params: BTreeMap::new(),
        }
    }

    pub fn is_suite(&self) -> bool {
        self.experiment == "suite"
    }

    /// Canonical text; `parse(to_text(c)) == c`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "experiment = {}", self.experiment);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "jobs = {}", self.jobs);
        let _ = writeln!(s, "out_dir = \"{}\"", self.out_dir);
        if let Some(g) = &self.geometry {
            let kind = match g.kind {
                WarpKind::Exp => "exp",
                WarpKind::Cosh => "cosh",
                WarpKind::Power { .. } => "power",
            };
            let _ = writeln!(s, "geometry.kind = {kind}");
            if let WarpKind::Power { sigma } = g.kind {
                let _ = writeln!(s, "geometry.sigma = {sigma}");
            }
            let _ = writeln!(s, "geometry.r0 = {}", g.r0);
        }
        if let Some(a) = &self.angular {
            let list = ConfigValue::List(a.circumferences.iter().map(|&c| ConfigValue::Num(c)).collect());
            let _ = writeln!(s, "angular.circumferences = {}", list.render());
            if let Some(m) = a.mu_max {
                let _ = writeln!(s, "angular.mu_max = {m}");
            }
        }
        if let Some(r) = &self.radial {
            if let Some(v) = r.rmax {
                let _ = writeln!(s, "radial.rmax = {v}");
            }
            if let Some(n) = r.n {
                let _ = writeln!(s, "radial.n = {n}");
            }
        }
        for (k, v) in &self.params {
            let _ = writeln!(s, "params.{k} = {}", v.render());
        }
        s
    }

    /// Parameters of `experiment` after applying the sections and the `params.*` overrides
    /// to its defaults. Sections only touch fields the experiment has.
    pub fn resolved_params(&self, experiment: &str) -> Result<Value> {
        let mut obj = match default_params(experiment)? {
            Value::Object(m) => m,
            _ => unreachable!("parameters serialize to objects"),
        };
        self.apply_sections(&mut obj)?;
        for (k, v) in &self.params {
            obj.insert(k.clone(), v.to_json());
        }
        Ok(Value::Object(obj))
    }

    fn apply_sections(&self, obj: &mut Map<String, Value>) -> Result<()> {
        if obj.contains_key("seed") {
            obj.insert("seed".into(), Value::from(self.seed));
        }
        if let Some(g) = &self.geometry {
            if obj.contains_key("profile") {
                obj.insert("profile".into(), serde_json::to_value(g)?);
            }
        }
        if let Some(m) = self.angular.as_ref().and_then(|a| a.mu_max) {
            if obj.contains_key("mu_max") {
                obj.insert("mu_max".into(), Value::from(m));
            }
        }
        if let Some(r) = &self.radial {
            if let (Some(rmax), true) = (r.rmax, obj.contains_key("rmax")) {
                obj.insert("rmax".into(), Value::from(rmax));
            }
            if let (Some(n), Some(rmax), true) = (r.n, r.rmax, obj.contains_key("dr")) {
                let r0 = obj.get("profile").and_then(|p| p.get("r0")).and_then(Value::as_f64).unwrap_or(0.0);
                obj.insert("dr".into(), Value::from((rmax - r0) / (n as f64 + 1.0)));
            }
        }
        Ok(())
    }
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Config { line, msg: msg.into() }
}

/// Parses and validates a config. Unknown keys, duplicates, type mismatches and
/// missing required keys are errors carrying the offending line number.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut entries: Vec<(usize, String, ConfigValue)> = vec![];
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = strip_comment(raw).trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| err(line, "expected `key = value`"))?;
        let key = key.trim();
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(err(line, format!("malformed key `{key}`")));
        }
        if entries.iter().any(|(_, k, _)| k == key) {
            return Err(err(line, format!("duplicate key `{key}`")));
        }
        let value = ConfigValue::parse(value).map_err(|m| err(line, m))?;
        entries.push((line, key.to_string(), value));
    }
    let get = |key: &str| entries.iter().find(|(_, k, _)| k == key).map(|(l, _, v)| (*l, v));
    let (_, exp) = get("experiment").ok_or_else(|| err(0, "missing required key `experiment`"))?;
    let exp_line = get("experiment").map_or(0, |(l, _)| l);
    let mut cfg = RunConfig::new(&exp.as_text().map_err(|m| err(exp_line, m))?);
    if !cfg.is_suite() && !CATALOG.iter().any(|(n, _)| *n == cfg.experiment) {
        let valid: Vec<&str> = CATALOG.iter().map(|(n, _)| *n).chain(["suite"]).collect();
        return Err(Error::UnknownExperiment { name: cfg.experiment.clone(), valid: valid.join(", ") });
    }
    let mut geometry: BTreeMap<&str, (usize, &ConfigValue)> = BTreeMap::new();
    let mut angular = None::<AngularConfig>;
    let mut radial = None::<RadialConfig>;
    for (line, key, value) in &entries {
        let line = *line;
        let e = |m: String| err(line, m);
        match key.split_once('.') {
            None => match key.as_str() {
                "experiment" => {}
                "seed" => cfg.seed = value.as_count().map_err(e)?,
                "jobs" => {
                    let j = value.as_count().map_err(e)?;
                    if j == 0 {
                        return Err(err(line, "jobs must be at least 1"));
                    }
                    cfg.jobs = j as usize;
                }
                "out_dir" => cfg.out_dir = value.as_text().map_err(e)?,
                other => return Err(err(line, format!("unknown key `{other}`"))),
            },
            Some(("geometry", k @ ("kind" | "sigma" | "r0"))) => {
                geometry.insert(k, (line, value));
            }
            Some(("angular", "circumferences")) => {
                let list = match value {
                    ConfigValue::List(items) => items.iter().map(|v| v.as_num()).collect::<std::result::Result<Vec<_>, _>>().map_err(e)?,
                    other => vec![other.as_num().map_err(e)?],
                };
                if list.is_empty() || list.iter().any(|&c| c <= 0.0) {
                    return Err(err(line, "circumferences must be a non-empty list of positive numbers"));
                }
                angular.get_or_insert(AngularConfig { circumferences: vec![std::f64::consts::TAU], mu_max: None }).circumferences = list;
            }
            Some(("angular", "mu_max")) => {
                let m = value.as_num().map_err(e)?;
                if m < 0.0 {
                    return Err(err(line, "mu_max must be non-negative"));
                }
                angular.get_or_insert(AngularConfig { circumferences: vec![std::f64::consts::TAU], mu_max: None }).mu_max = Some(m);
            }
            Some(("radial", "rmax")) => {
                radial.get_or_insert(RadialConfig { rmax: None, n: None }).rmax = Some(value.as_num().map_err(e)?);
            }
            Some(("radial", "n")) => {
                radial.get_or_insert(RadialConfig { rmax: None, n: None }).n = Some(value.as_count().map_err(e)? as usize);
            }
            Some(("params", field)) => {
                cfg.params.insert(field.to_string(), value.clone());
            }
            _ => return Err(err(line, format!("unknown key `{key}`"))),
        }
    }
    if !geometry.is_empty() {
        let any_line = geometry.values().next().map_or(0, |(l, _)| *l);
        let (kline, kind) = geometry.get("kind").copied().ok_or_else(|| err(any_line, "geometry section needs `geometry.kind`"))?;
        let kind = kind.as_text().map_err(|m| err(kline, m))?;
        let num = |k: &str| -> Result<Option<f64>> {
            geometry.get(k).map(|(l, v)| v.as_num().map_err(|m| err(*l, m))).transpose()
        };
        let sigma = num("sigma")?;
        let profile = match kind.as_str() {
            "exp" | "cosh" => {
                if let Some((l, _)) = geometry.get("sigma") {
                    return Err(err(*l, format!("`geometry.sigma` only applies to power cusps, not `{kind}`")));
                }
                let r0 = num("r0")?.unwrap_or(0.0);
                if kind == "exp" {
                    WarpProfile::exp(r0)
                } else {
                    WarpProfile::cosh(r0)
                }
            }
            "power" => {
                let sigma = sigma.ok_or_else(|| err(kline, "`geometry.kind = power` requires `geometry.sigma`"))?;
                let r0 = num("r0")?.unwrap_or(POWER_MIN_R0);
                WarpProfile::power(sigma, r0).map_err(|e| err(kline, e.to_string()))?
            }
            other => return Err(err(kline, format!("unknown geometry kind `{other}` (exp, cosh, power)"))),
        };
        cfg.geometry = Some(profile);
    }
    if let Some(r) = &radial {
        let line = entries.iter().find(|(_, k, _)| k == "radial.n").map_or(0, |(l, _, _)| *l);
        if r.n.is_some() && r.rmax.is_none() {
            return Err(err(line, "`radial.n` requires `radial.rmax`"));
        }
    }
    cfg.angular = angular;
    cfg.radial = radial;
    validate(&cfg, &entries)?;
    Ok(cfg)
}

fn strip_comment(line: &str) -> &str {
    let mut in_str = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => in_str = !in_str,
            '#' if !in_str => return &line[..i],
            _ => {}
        }
    }
    line
}

/// Rejects unknown parameter names and values the experiment cannot deserialize.
fn validate(cfg: &RunConfig, entries: &[(usize, String, ConfigValue)]) -> Result<()> {
    let line_of = |key: &str| entries.iter().find(|(_, k, _)| k == key).map_or(0, |(l, _, _)| *l);
    if cfg.is_suite() {
        if let Some((l, k, _)) = entries.iter().find(|(_, k, _)| k.contains('.')) {
            return Err(err(*l, format!("`{k}`: the suite runs the pinned acceptance configuration; only seed, jobs and out_dir apply")));
        }
        return Ok(());
    }
    let defaults = default_params(&cfg.experiment)?;
    let base = RunConfig { params: BTreeMap::new(), ..cfg.clone() };
    let mut current = base.resolved_params(&cfg.experiment)?;
    check_params(&cfg.experiment, &current).map_err(|m| err(0, m))?;
    for (k, v) in &cfg.params {
        let line = line_of(&format!("params.{k}"));
        if defaults.get(k).is_none() {
            let known: Vec<&String> = defaults.as_object().map(|m| m.keys().collect()).unwrap_or_default();
            return Err(err(line, format!("unknown parameter `{k}` for `{}`; known: {known:?}", cfg.experiment)));
        }
        current[k] = v.to_json();
        check_params(&cfg.experiment, &current).map_err(|m| err(line, format!("parameter `{k}`: {m}")))?;
    }
    Ok(())
}

fn check_params(experiment: &str, params: &Value) -> std::result::Result<(), String> {
    crate::experiments::typecheck_params(experiment, params).map_err(|e| e.to_string())
}

/// Names accepted by `experiment = ...`.
pub fn valid_experiments() -> Vec<&'static str> {
    CATALOG.iter().map(|(n, _)| *n).chain(["suite"]).collect()
}

/// Suite entry labels in run order.
pub fn suite_labels() -> Vec<&'static str> {
    SUITE.iter().map(|e| e.label).collect()
}
