//! Run configuration files.
//!
//! Grammar, one item per line:
//!
//! ```text
//! # comment
//! key = value
//! key = a, b, c        # a list; a trailing comma marks a one-element list
//! [section]
//! ```
//!
//! Keys before the first section header belong to the root section `""`.
//! Values are kept verbatim (trimmed); typing happens in [`Params`].

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Scalar(String),
    List(Vec<String>),
}

impl Value {
    pub fn items(&self) -> Vec<&str> {
        match self {
            Value::Scalar(s) => vec![s.as_str()],
            Value::List(v) => v.iter().map(String::as_str).collect(),
        }
    }

    fn parse(raw: &str) -> Result<Value, String> {
        let raw = raw.trim();
        if raw.is_empty() {
            return Err("empty value".into());
        }
        if !raw.contains(',') {
            return Ok(Value::Scalar(raw.to_string()));
        }
        let mut items: Vec<String> = raw.split(',').map(|s| s.trim().to_string()).collect();
        if items.last().is_some_and(String::is_empty) {
            items.pop();
        }
        if items.is_empty() || items.iter().any(String::is_empty) {
            return Err(format!("malformed list '{raw}'"));
        }
        Ok(Value::List(items))
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Scalar(s) => f.write_str(s),
            Value::List(v) if v.len() == 1 => write!(f, "{},", v[0]),
            Value::List(v) => f.write_str(&v.join(", ")),
        }
    }
}

pub type Section = BTreeMap<String, Value>;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Config {
    pub sections: BTreeMap<String, Section>,
}

fn valid_key(key: &str) -> bool {
    let mut chars = key.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

impl Config {
    pub fn parse(text: &str) -> Result<Config, CliError> {
        let mut cfg = Config::default();
        let mut current = String::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            let err = |msg: String| CliError::Config(format!("line {}: {msg}", no + 1));
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| err("unterminated section header".into()))?.trim();
                if !valid_key(name) {
                    return Err(err(format!("invalid section name '{name}'")));
                }
                current = name.to_string();
                cfg.sections.entry(current.clone()).or_default();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| err(format!("expected 'key = value', got '{line}'")))?;
            let key = key.trim();
            if !valid_key(key) {
                return Err(err(format!("invalid key '{key}'")));
            }
            let value = Value::parse(value).map_err(err)?;
            let section = cfg.sections.entry(current.clone()).or_default();
            if section.insert(key.to_string(), value).is_some() {
                return Err(err(format!("duplicate key '{key}'")));
            }
        }
        Ok(cfg)
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        if let Some(root) = self.sections.get("") {
            for (k, v) in root {
                out.push_str(&format!("{k} = {v}\n"));
            }
        }
        for (name, section) in self.sections.iter().filter(|(n, _)| !n.is_empty()) {
            if !out.is_empty() {
                out.push('\n');
            }
            out.push_str(&format!("[{name}]\n"));
            for (k, v) in section {
                out.push_str(&format!("{k} = {v}\n"));
            }
        }
        out
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.get(name)
    }

    pub fn set(&mut self, section: &str, key: &str, value: &str) -> Result<(), CliError> {
        if !valid_key(key) {
            return Err(CliError::Config(format!("invalid key '{key}'")));
        }
        let value = Value::parse(value).map_err(|e| CliError::Config(format!("{key}: {e}")))?;
        self.sections.entry(section.to_string()).or_default().insert(key.to_string(), value);
        Ok(())
    }
}

/// What a parameter is and whether it may be omitted.
#[derive(Clone, Copy, Debug)]
pub struct KeySpec {
    pub name: &'static str,
    /// `None` marks a parameter that must be given explicitly.
    pub default: Option<&'static str>,
    pub help: &'static str,
}

pub const fn required(name: &'static str, help: &'static str) -> KeySpec {
    KeySpec { name, default: None, help }
}

pub const fn optional(name: &'static str, default: &'static str, help: &'static str) -> KeySpec {
    KeySpec { name, default: Some(default), help }
}

/// Validated, fully resolved parameters of one experiment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Params {
    values: Section,
}

impl Params {
    /// Checks `section` against `schema`: unknown keys and missing required
    /// keys are errors, optional keys are filled with their defaults.
    pub fn resolve(section: &Section, schema: &[KeySpec]) -> Result<Params, CliError> {
        if let Some(k) = section.keys().find(|k| !schema.iter().any(|s| s.name == k.as_str())) {
            let known: Vec<&str> = schema.iter().map(|s| s.name).collect();
            return Err(CliError::Config(format!("unknown key '{k}' (expected one of: {})", known.join(", "))));
        }
        let mut values = Section::new();
        for spec in schema {
            let value = match (section.get(spec.name), spec.default) {
                (Some(v), _) => v.clone(),
                (None, Some(d)) => Value::parse(d).map_err(CliError::Config)?,
                (None, None) => return Err(CliError::Config(format!("missing required parameter '{}' ({})", spec.name, spec.help))),
            };
            values.insert(spec.name.to_string(), value);
        }
        Ok(Params { values })
    }

    pub fn section(&self) -> &Section {
        &self.values
    }

    fn raw(&self, key: &str) -> Result<&Value, CliError> {
        self.values.get(key).ok_or_else(|| CliError::Config(format!("parameter '{key}' is not defined for this experiment")))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T, CliError> {
        match self.raw(key)? {
            Value::Scalar(s) => parse_item(key, s),
            Value::List(_) => Err(CliError::Config(format!("'{key}' takes a single value"))),
        }
    }

    pub fn list<T: FromStr>(&self, key: &str) -> Result<Vec<T>, CliError> {
        self.raw(key)?.items().into_iter().map(|s| parse_item(key, s)).collect()
    }

    pub fn real(&self, key: &str) -> Result<f64, CliError> {
        match self.raw(key)? {
            Value::Scalar(s) => parse_real(key, s),
            Value::List(_) => Err(CliError::Config(format!("'{key}' takes a single value"))),
        }
    }

    pub fn reals(&self, key: &str) -> Result<Vec<f64>, CliError> {
        self.raw(key)?.items().into_iter().map(|s| parse_real(key, s)).collect()
    }

    /// Integer list where items may be ranges `a..b` (inclusive).
    pub fn integers(&self, key: &str) -> Result<Vec<u64>, CliError> {
        let mut out = Vec::new();
        for item in self.raw(key)?.items() {
            match item.split_once("..") {
                Some((a, b)) => {
                    let (a, b): (u64, u64) = (parse_item(key, a)?, parse_item(key, b)?);
                    if b < a {
                        return Err(CliError::Config(format!("{key}: empty range {item}")));
                    }
                    out.extend(a..=b);
                }
                None => out.push(parse_item(key, item)?),
            }
        }
        Ok(out)
    }

    pub fn flag(&self, key: &str) -> Result<bool, CliError> {
        self.get(key)
    }
}

fn parse_item<T: FromStr>(key: &str, s: &str) -> Result<T, CliError> {
    s.trim().parse().map_err(|_| CliError::Config(format!("{key}: cannot parse '{s}'")))
}

/// A float, or a fraction `a/b` of floats.
pub fn parse_real(key: &str, s: &str) -> Result<f64, CliError> {
    let value = match s.split_once('/') {
        Some((a, b)) => parse_item::<f64>(key, a)? / parse_item::<f64>(key, b)?,
        None => parse_item(key, s)?,
    };
    if !value.is_finite() {
        return Err(CliError::Config(format!("{key}: '{s}' is not a finite number")));
    }
    Ok(value)
}
