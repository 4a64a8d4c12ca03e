//! Experiment configuration: UTF-8 `key = value` lines grouped under
//! `[section]` headers.
//!
//! Every accepted key is listed in [`SCHEMA`]; unknown keys, repeated keys
//! (other than `[jammer] spec`) and values that fail to parse are errors.
//! Lists are comma-separated. `#` starts a comment.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Int,
    Float,
    Bool,
    Text,
    Ints,
    Floats,
    Texts,
    /// May be given on several lines; each line is one entry.
    Repeated,
}

impl Kind {
    /// Kinds a sweep can vary.
    pub fn is_numeric(self) -> bool {
        matches!(self, Kind::Int | Kind::Float | Kind::Ints | Kind::Floats)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct KeySpec {
    pub section: &'static str,
    pub name: &'static str,
    pub kind: Kind,
    /// `None` when the default depends on other keys or the key is optional.
    pub default: Option<&'static str>,
}

const fn key(section: &'static str, name: &'static str, kind: Kind, default: Option<&'static str>) -> KeySpec {
    KeySpec { section, name, kind, default }
}

use Kind::*;

pub const SCHEMA: &[KeySpec] = &[
    key("", "mode", Text, None),
    key("", "seed", Int, Some("0")),
    key("", "trials", Int, Some("1000")),
    key("", "out", Text, Some("results")),
    key("channel", "kind", Text, None),
    key("channel", "power", Float, Some("1")),
    key("channel", "lambda", Float, Some("1")),
    key("channel", "noise_var", Float, Some("1")),
    key("channel", "state_var", Float, Some("1")),
    key("channel", "preset", Text, Some("noisy_stuck_at")),
    key("channel", "p", Float, Some("0.2")),
    key("channel", "noise", Floats, Some("0, 0.1")),
    key("channel", "x_size", Int, None),
    key("channel", "s_size", Int, None),
    key("channel", "j_size", Int, None),
    key("channel", "y_size", Int, None),
    key("channel", "w", Text, None),
    key("channel", "p_s", Floats, None),
    key("code", "n", Ints, Some("128")),
    key("code", "rate", Float, None),
    key("code", "rate_fraction", Float, Some("0.5")),
    key("code", "rate_tilde", Float, None),
    key("code", "delta1", Float, None),
    key("code", "backend", Text, Some("auto")),
    key("code", "permute", Bool, Some("false")),
    key("code", "memory_cap", Int, Some("67108864")),
    key("code", "eps1", Float, None),
    key("code", "eps", Float, Some("0.1")),
    key("code", "threshold_slack", Float, Some("0.05")),
    key("code", "delta", Float, None),
    key("code", "gamma", Float, None),
    key("code", "calibration_trials", Int, Some("500")),
    key("code", "calibration_quantile", Float, Some("0.99")),
    key("code", "lp_tol", Float, Some("1e-9")),
    key("code", "list_mode", Text, Some("full")),
    key("code", "encoder_failure", Float, Some("0.01")),
    key("jammer", "spec", Repeated, None),
    key("solver", "u_size", Int, None),
    key("solver", "starts", Int, Some("16")),
    key("solver", "restarts", Int, Some("2")),
    key("solver", "grid_resolution", Int, Some("32")),
    key("lemmas", "which", Texts, Some("sphere_cap, markov, hoeffding")),
    key("lemmas", "sphere_gamma", Floats, Some("0.2, 0.5")),
    key("lemmas", "sphere_n", Ints, Some("100, 200")),
    key("lemmas", "sphere_direction", Text, Some("axis")),
    key("lemmas", "markov_instance", Text, Some("binary_rare_cell")),
    key("lemmas", "markov_n", Ints, Some("50, 100, 200")),
    key("lemmas", "markov_delta0", Float, Some("0.02")),
    key("lemmas", "markov_delta", Floats, Some("0.03, 0.05, 0.075, 0.1")),
    key("lemmas", "hoeffding_population", Int, Some("1000")),
    key("lemmas", "hoeffding_ones", Int, Some("300")),
    key("lemmas", "hoeffding_sample", Int, Some("100")),
    key("lemmas", "hoeffding_t", Floats, Some("0.05, 0.1, 0.15")),
    key("sweep", "axis", Text, None),
    key("sweep", "values", Floats, None),
];

/// Dotted name: `seed`, `channel.lambda`.
pub fn full_name(section: &str, name: &str) -> String {
    if section.is_empty() {
        name.to_string()
    } else {
        format!("{section}.{name}")
    }
}

pub fn lookup(full: &str) -> Option<&'static KeySpec> {
    SCHEMA.iter().find(|k| full_name(k.section, k.name) == full)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    File,
    Flag,
    Default,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::File => "config",
            Source::Flag => "flag",
            Source::Default => "default",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub values: Vec<String>,
    pub source: Source,
}

/// Parsed configuration keyed by dotted name.
#[derive(Debug, Clone, Default)]
pub struct Config {
    entries: BTreeMap<String, Entry>,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn split_list(raw: &str) -> Vec<String> {
    raw.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
}

fn check_value(spec: &KeySpec, raw: &str) -> Result<()> {
    let name = full_name(spec.section, spec.name);
    let bad = |why: String| config_err(format!("{name}: {why}"));
    let int =
        |s: &str| s.parse::<u64>().map(|_| ()).map_err(|e| bad(format!("'{s}' is not a nonnegative integer ({e})")));
    let float = |s: &str| match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(()),
        Ok(_) => Err(bad(format!("'{s}' is not finite"))),
        Err(e) => Err(bad(format!("'{s}' is not a number ({e})"))),
    };
    match spec.kind {
        Int => int(raw),
        Float => float(raw),
        Bool => match raw {
            "true" | "false" => Ok(()),
            _ => Err(bad(format!("expected true or false, got '{raw}'"))),
        },
        Text | Repeated => {
            if raw.is_empty() {
                Err(bad("empty value".into()))
            } else {
                Ok(())
            }
        }
        Ints => split_list(raw).iter().try_for_each(|s| int(s)),
        Floats => split_list(raw).iter().try_for_each(|s| float(s)),
        Texts => Ok(()),
    }
}

impl Config {
    /// Parse config text. Defaults are not filled in.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Config::default();
        let mut section = String::new();
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| config_err(format!("line {lineno}: unterminated section header")))?
                    .trim();
                if !SCHEMA.iter().any(|k| k.section == name) || name.is_empty() {
                    return Err(config_err(format!("line {lineno}: unknown section [{name}]")));
                }
                section = name.to_string();
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| config_err(format!("line {lineno}: expected key = value, got '{line}'")))?;
            let (k, v) = (k.trim(), v.trim().trim_matches('"'));
            let full = full_name(&section, k);
            let spec = lookup(&full).ok_or_else(|| config_err(format!("line {lineno}: unknown key '{full}'")))?;
            check_value(spec, v).map_err(|e| config_err(format!("line {lineno}: {}", strip_prefix(&e))))?;
            match cfg.entries.get_mut(&full) {
                Some(e) if spec.kind == Repeated => e.values.push(v.to_string()),
                Some(_) => return Err(config_err(format!("line {lineno}: '{full}' given twice"))),
                None => {
                    cfg.entries.insert(full, Entry { values: vec![v.to_string()], source: Source::File });
                }
            }
        }
        Ok(cfg)
    }

    /// Replace a value, checking it against the schema.
    pub fn set(&mut self, full: &str, value: &str, source: Source) -> Result<()> {
        let spec = lookup(full).ok_or_else(|| config_err(format!("unknown key '{full}'")))?;
        check_value(spec, value)?;
        self.entries.insert(full.to_string(), Entry { values: vec![value.to_string()], source });
        Ok(())
    }

    /// Set `full` to `value` unless it is already present; recorded as a default.
    pub fn fill(&mut self, full: &str, value: &str) -> Result<()> {
        if !self.entries.contains_key(full) {
            self.set(full, value, Source::Default)?;
        }
        Ok(())
    }

    /// Fill every key that has a static default.
    pub fn fill_defaults(&mut self) {
        for k in SCHEMA {
            if let Some(d) = k.default {
                self.fill(&full_name(k.section, k.name), d).expect("schema defaults are valid");
            }
        }
    }

    pub fn contains(&self, full: &str) -> bool {
        self.entries.contains_key(full)
    }

    pub fn entries(&self) -> &BTreeMap<String, Entry> {
        &self.entries
    }

    fn raw(&self, full: &str) -> Option<&str> {
        self.entries.get(full).map(|e| e.values[0].as_str())
    }

    fn required(&self, full: &str) -> Result<&str> {
        self.raw(full).ok_or_else(|| config_err(format!("missing required key '{full}'")))
    }

    pub fn opt_text(&self, full: &str) -> Option<&str> {
        self.raw(full)
    }

    pub fn text(&self, full: &str) -> Result<&str> {
        self.required(full)
    }

    pub fn opt_f64(&self, full: &str) -> Option<f64> {
        self.raw(full).map(|v| v.parse().expect("validated on insert"))
    }

    pub fn f64(&self, full: &str) -> Result<f64> {
        self.required(full).map(|v| v.parse().expect("validated on insert"))
    }

    pub fn opt_u64(&self, full: &str) -> Option<u64> {
        self.raw(full).map(|v| v.parse().expect("validated on insert"))
    }

    pub fn u64(&self, full: &str) -> Result<u64> {
        self.required(full).map(|v| v.parse().expect("validated on insert"))
    }

    pub fn usize(&self, full: &str) -> Result<usize> {
        let v = self.u64(full)?;
        usize::try_from(v).map_err(|_| config_err(format!("{full}: {v} is too large")))
    }

    pub fn bool(&self, full: &str) -> Result<bool> {
        self.required(full).map(|v| v == "true")
    }

    pub fn texts(&self, full: &str) -> Result<Vec<String>> {
        Ok(split_list(self.required(full)?))
    }

    pub fn f64s(&self, full: &str) -> Result<Vec<f64>> {
        Ok(split_list(self.required(full)?).iter().map(|v| v.parse().expect("validated on insert")).collect())
    }

    pub fn usizes(&self, full: &str) -> Result<Vec<usize>> {
        split_list(self.required(full)?)
            .iter()
            .map(|v| v.parse::<usize>().map_err(|e| config_err(format!("{full}: {e}"))))
            .collect()
    }

    /// All lines of a repeated key.
    pub fn repeated(&self, full: &str) -> Vec<String> {
        self.entries.get(full).map(|e| e.values.clone()).unwrap_or_default()
    }
}

fn strip_prefix(e: &Error) -> String {
    match e {
        Error::Config(m) => m.clone(),
        other => other.to_string(),
    }
}
