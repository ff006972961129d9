//! Flat `key = value` scenario configuration.
//!
//! Keys carry their unit as a suffix (`_m`, `_rad`, `_deg`, `_muB`); a key whose stem is
//! known but whose suffix differs is reported as a unit mismatch rather than as unknown.
//! Every key has a default, most of them the reference design (a = 4 um, b = 2.5 um,
//! f = 0.5 m, 300 keV); defaults written as "scenario" depend on the scenario being run.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("{origin}: syntax error: {msg}")]
    Syntax { origin: String, msg: String },
    #[error("{origin}: unknown key `{key}`")]
    UnknownKey { origin: String, key: String },
    #[error("{origin}: unit suffix mismatch: `{key}` should be `{expected}`")]
    UnitMismatch {
        origin: String,
        key: String,
        expected: String,
    },
    #[error("{origin}: invalid value for `{key}`: {msg}")]
    InvalidValue {
        origin: String,
        key: String,
        msg: String,
    },
    #[error("{origin}: `{key}` is set more than once")]
    Duplicate { origin: String, key: String },
    #[error("config is for scenario `{found}`, not `{requested}`")]
    ScenarioMismatch { found: String, requested: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Float,
    Count,
    FloatList,
    Text,
    Choice(&'static [&'static str]),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Rule {
    Any,
    Positive,
    NonNegative,
    SectorFactor,
}

struct KeyDef {
    key: &'static str,
    kind: Kind,
    rule: Rule,
    default: &'static str,
    doc: &'static str,
}

const SCENARIOS: &[&str] = &[
    "fig1-sector",
    "fig2-charges",
    "fig3-astig",
    "fig3-dipole",
    "figS1-cascade",
    "fig4-monopole",
    "verify",
];

const KERNELS: &[&str] = &["printed", "fresnel"];
const ENVELOPES: &[&str] = &["annulus", "gaussian"];

macro_rules! key {
    ($k:expr, $kind:expr, $rule:expr, $def:expr, $doc:expr) => {
        KeyDef {
            key: $k,
            kind: $kind,
            rule: $rule,
            default: $def,
            doc: $doc,
        }
    };
}

const SCHEMA: &[KeyDef] = &[
    key!("scenario", Kind::Choice(SCENARIOS), Rule::Any, "command line", "scenario this file is for"),
    key!("grid.nx", Kind::Count, Rule::Positive, "1024", "samples along x"),
    key!("grid.ny", Kind::Count, Rule::Positive, "grid.nx", "samples along y"),
    key!("grid.pitch_m", Kind::Float, Rule::Positive, "b/128 (fig2, fig4: 3.2 R/nx)", "input-plane sample pitch"),
    key!("beam.lambda_m", Kind::Float, Rule::Positive, "1.9687e-12", "wavelength (300 keV electrons)"),
    key!("transform.n", Kind::Float, Rule::SectorFactor, "scenario (-1/2, +1, -2)", "sector factor of the (first) transformer"),
    key!("transform.a_m", Kind::Float, Rule::Positive, "4.0e-6", "output scale a"),
    key!("transform.b_m", Kind::Float, Rule::Positive, "2.5e-6", "input scale b"),
    key!("transform.theta0_rad", Kind::Float, Rule::Any, "0", "sector offset"),
    key!("transform.f_m", Kind::Float, Rule::Positive, "0.5", "plate separation f"),
    key!("cascade.n2", Kind::Float, Rule::SectorFactor, "0.5", "sector factor of the second stage"),
    key!("cascade.a2_m", Kind::Float, Rule::Positive, "4.5e-6", "second-stage output scale"),
    key!("cascade.b2_m", Kind::Float, Rule::Positive, "4.0e-6", "second-stage input scale"),
    key!("cascade.f2_m", Kind::Float, Rule::Positive, "transform.f_m", "second-stage separation"),
    key!("lens.f_m", Kind::Float, Rule::Positive, "transform.f_m", "Fourier lens focal length"),
    key!("propagation.kernel", Kind::Choice(KERNELS), Rule::Any, "scenario", "printed (pure Fourier) or fresnel"),
    key!("input.m", Kind::Float, Rule::Any, "scenario", "multipole order of the input phase"),
    key!("input.A", Kind::Float, Rule::Any, "0", "input amplitude A (rad m^-m)"),
    key!("input.theta0_rad", Kind::Float, Rule::Any, "0", "input orientation"),
    key!("input.l", Kind::Float, Rule::Any, "2", "vortex charge for fig1-sector"),
    key!("envelope.kind", Kind::Choice(ENVELOPES), Rule::Any, "scenario", "annulus or gaussian ring"),
    key!("envelope.r_inner_m", Kind::Float, Rule::NonNegative, "transform.b_m / 2", "annulus inner radius"),
    key!("envelope.r_outer_m", Kind::Float, Rule::Positive, "2 transform.b_m", "annulus outer radius"),
    key!("envelope.ring_m", Kind::Float, Rule::NonNegative, "1.5 transform.b_m", "gaussian ring radius"),
    key!("envelope.waist_m", Kind::Float, Rule::Positive, "transform.b_m / 2", "gaussian ring waist"),
    key!("sweep.strengths_m", Kind::FloatList, Rule::NonNegative, "30e-9, 60e-9, 90e-9", "astigmatism strengths C_a"),
    key!("sweep.moments_muB", Kind::FloatList, Rule::NonNegative, "1e6, 5e6, 10e6", "dipole moments"),
    key!("sweep.orientations_deg", Kind::FloatList, Rule::Any, "0, 45, 90, 135", "input orientations theta0"),
    key!("astig.f_obj_m", Kind::Float, Rule::Positive, "3.33e-3", "objective focal length"),
    key!("fig1.ns", Kind::FloatList, Rule::SectorFactor, "2, 3, -2, -3", "sector factors (fig1, fig2)"),
    key!("charges.radius_m", Kind::Float, Rule::Positive, "2 transform.b_m", "ring radius R of the charge models"),
    key!("charges.separation_m", Kind::Float, Rule::Positive, "2 grid pitches", "point-multipole charge spacing"),
    key!("charges.rho_ref_m", Kind::Float, Rule::Positive, "charges.radius_m", "log-kernel reference radius"),
    key!("output.dir", Kind::Text, Rule::Any, "--out", "output directory"),
];

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Float(f64),
    Count(usize),
    List(Vec<f64>),
    Text(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            // `{:?}` on f64 prints the shortest string that parses back to the same value
            Value::Float(v) => write!(f, "{v:?}"),
            Value::Count(n) => write!(f, "{n}"),
            Value::List(vs) => {
                let parts: Vec<String> = vs.iter().map(|v| format!("{v:?}")).collect();
                write!(f, "{}", parts.join(", "))
            }
            Value::Text(s) => write!(f, "{s}"),
        }
    }
}

/// Explicitly set keys; everything else falls back to its default.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScenarioConfig {
    entries: BTreeMap<String, Value>,
}

fn find(key: &str) -> Option<&'static KeyDef> {
    SCHEMA.iter().find(|d| d.key == key)
}

/// Stem of a key without its unit suffix (`transform.a_m` → `transform.a`).
fn stem(key: &str) -> &str {
    let (head, last) = key.rsplit_once('.').unwrap_or(("", key));
    match last.rsplit_once('_') {
        Some((s, _)) => &key[..head.len() + usize::from(!head.is_empty()) + s.len()],
        None => key,
    }
}

fn parse_float(text: &str) -> Result<f64, String> {
    let v: f64 = text
        .trim()
        .parse()
        .map_err(|_| format!("`{}` is not a number", text.trim()))?;
    if !v.is_finite() {
        return Err("must be finite".into());
    }
    Ok(v)
}

fn check_rule(rule: Rule, v: f64) -> Result<(), String> {
    match rule {
        Rule::Any => Ok(()),
        Rule::Positive if v > 0.0 => Ok(()),
        Rule::Positive => Err(format!("{v} must be > 0")),
        Rule::NonNegative if v >= 0.0 => Ok(()),
        Rule::NonNegative => Err(format!("{v} must be >= 0")),
        Rule::SectorFactor if v == 0.0 => Err("sector factor must satisfy n != 0".into()),
        Rule::SectorFactor if v != 1.0 && (v - 1.0).abs() < 1e-9 => {
            Err(format!("n = {v} is too close to 1 for a power-law plate; use exactly 1"))
        }
        Rule::SectorFactor => Ok(()),
    }
}

fn parse_value(def: &KeyDef, raw: &str) -> Result<Value, String> {
    let raw = raw.trim();
    let v = match def.kind {
        Kind::Float => {
            let v = parse_float(raw)?;
            check_rule(def.rule, v)?;
            Value::Float(v)
        }
        Kind::Count => {
            let n: usize = raw
                .parse()
                .map_err(|_| format!("`{raw}` is not a non-negative integer"))?;
            if def.rule == Rule::Positive && n == 0 {
                return Err("must be > 0".into());
            }
            Value::Count(n)
        }
        Kind::FloatList => {
            if raw.is_empty() {
                return Err("list must not be empty".into());
            }
            let vs = raw
                .split(',')
                .map(|p| {
                    let v = parse_float(p)?;
                    check_rule(def.rule, v)?;
                    Ok(v)
                })
                .collect::<Result<Vec<_>, String>>()?;
            Value::List(vs)
        }
        Kind::Text => {
            if raw.is_empty() {
                return Err("must not be empty".into());
            }
            Value::Text(raw.to_string())
        }
        Kind::Choice(options) => {
            if !options.contains(&raw) {
                return Err(format!("expected one of {}", options.join(", ")));
            }
            Value::Text(raw.to_string())
        }
    };
    Ok(v)
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (i, line) in text.lines().enumerate() {
            cfg.apply_line(line, &format!("line {}", i + 1), false)?;
        }
        Ok(cfg)
    }

    /// Applies `key=value` overrides on top of the parsed file.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, overrides: &[S]) -> Result<(), ConfigError> {
        for (i, o) in overrides.iter().enumerate() {
            self.apply_line(o.as_ref(), &format!("override {}", i + 1), true)?;
        }
        Ok(())
    }

    fn apply_line(&mut self, line: &str, origin: &str, replace: bool) -> Result<(), ConfigError> {
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            return Ok(());
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Syntax {
                origin: origin.into(),
                msg: format!("expected `key = value`, found `{content}`"),
            });
        };
        let key = key.trim();
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(ConfigError::Syntax {
                origin: origin.into(),
                msg: format!("malformed key `{key}`"),
            });
        }
        let Some(def) = find(key) else {
            let s = stem(key);
            if let Some(d) = SCHEMA.iter().find(|d| stem(d.key) == s && s != d.key) {
                return Err(ConfigError::UnitMismatch {
                    origin: origin.into(),
                    key: key.into(),
                    expected: d.key.into(),
                });
            }
            return Err(ConfigError::UnknownKey {
                origin: origin.into(),
                key: key.into(),
            });
        };
        let v = parse_value(def, value).map_err(|msg| ConfigError::InvalidValue {
            origin: origin.into(),
            key: key.into(),
            msg,
        })?;
        if !replace && self.entries.contains_key(key) {
            return Err(ConfigError::Duplicate {
                origin: origin.into(),
                key: key.into(),
            });
        }
        self.entries.insert(key.to_string(), v);
        Ok(())
    }

    /// Canonical text: one `key = value` line per explicitly set key, sorted by key.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }

    /// Documentation of every key with its default.
    pub fn describe_keys() -> String {
        let mut out = String::new();
        for d in SCHEMA {
            out.push_str(&format!("{:<24} default {:<22} {}\n", d.key, d.default, d.doc));
        }
        out
    }

    pub fn is_set(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn scenario(&self) -> Option<&str> {
        match self.entries.get("scenario") {
            Some(Value::Text(s)) => Some(s),
            _ => None,
        }
    }

    /// Ensures a `scenario` key, if present, names `requested`.
    pub fn check_scenario(&self, requested: &str) -> Result<(), ConfigError> {
        match self.scenario() {
            Some(found) if found != requested => Err(ConfigError::ScenarioMismatch {
                found: found.into(),
                requested: requested.into(),
            }),
            _ => Ok(()),
        }
    }

    fn known(key: &str) -> &'static KeyDef {
        find(key).unwrap_or_else(|| panic!("`{key}` is not a config key"))
    }

    pub fn float_or(&self, key: &str, default: f64) -> f64 {
        debug_assert_eq!(Self::known(key).kind, Kind::Float);
        match self.entries.get(key) {
            Some(Value::Float(v)) => *v,
            _ => default,
        }
    }

    /// Float key whose default is a literal in the schema.
    pub fn float(&self, key: &str) -> f64 {
        let def = Self::known(key);
        self.float_or(key, def.default.parse().unwrap_or(f64::NAN))
    }

    pub fn count_or(&self, key: &str, default: usize) -> usize {
        match self.entries.get(key) {
            Some(Value::Count(n)) => *n,
            _ => default,
        }
    }

    pub fn list(&self, key: &str) -> Vec<f64> {
        match self.entries.get(key) {
            Some(Value::List(v)) => v.clone(),
            _ => Self::known(key)
                .default
                .split(',')
                .map(|p| p.trim().parse().expect("schema list default parses"))
                .collect(),
        }
    }

    pub fn text_or<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        match self.entries.get(key) {
            Some(Value::Text(s)) => s,
            _ => default,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stems() {
        assert_eq!(stem("transform.a_m"), "transform.a");
        assert_eq!(stem("transform.a_mm"), "transform.a");
        assert_eq!(stem("grid.nx"), "grid.nx");
        assert_eq!(stem("sweep.moments_muB"), "sweep.moments");
    }

    #[test]
    fn schema_defaults_parse() {
        let cfg = ScenarioConfig::default();
        for d in SCHEMA {
            match d.kind {
                Kind::FloatList => assert!(!cfg.list(d.key).is_empty()),
                Kind::Float if d.default.parse::<f64>().is_ok() => assert!(cfg.float(d.key).is_finite()),
                _ => {}
            }
        }
    }
}
