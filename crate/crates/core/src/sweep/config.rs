//! Flat `key = value` config files with `--set key=value` overrides.
//!
//! One entry per line, `#` starts a comment. Flags override file values.
//! Numeric values may be simple expressions such as `2*sqrt(2)`.

use std::collections::BTreeMap;
use std::fmt;

use super::expr::Expr;
use super::SweepError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    File { line: usize },
    Flag,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::File { line } => write!(f, "line {line}"),
            Origin::Flag => write!(f, "--set"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub value: String,
    pub origin: Origin,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues {
    entries: BTreeMap<String, Entry>,
}

fn split_pair(text: &str) -> Option<(&str, &str)> {
    let (k, v) = text.split_once('=')?;
    let (k, v) = (k.trim(), v.trim());
    if k.is_empty() || v.is_empty() {
        return None;
    }
    Some((k, v))
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self, SweepError> {
        let mut kv = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = split_pair(content).ok_or_else(|| SweepError::Config {
                origin: Origin::File { line },
                key: None,
                message: format!("expected `key = value`, got `{content}`"),
            })?;
            if let Some(prev) = kv.entries.get(key) {
                return Err(SweepError::Config {
                    origin: Origin::File { line },
                    key: Some(key.to_string()),
                    message: format!("duplicate key (first set on {})", prev.origin),
                });
            }
            kv.entries.insert(
                key.to_string(),
                Entry {
                    value: value.to_string(),
                    origin: Origin::File { line },
                },
            );
        }
        Ok(kv)
    }

    /// Applies one `key=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<(), SweepError> {
        let (key, value) = split_pair(assignment).ok_or_else(|| SweepError::Config {
            origin: Origin::Flag,
            key: None,
            message: format!("expected `key=value`, got `{assignment}`"),
        })?;
        self.insert(key, value);
        Ok(())
    }

    pub fn insert(&mut self, key: &str, value: &str) {
        self.entries.insert(
            key.to_string(),
            Entry {
                value: value.to_string(),
                origin: Origin::Flag,
            },
        );
    }

    pub fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.get(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Entry)> {
        self.entries.iter().map(|(k, e)| (k.as_str(), e))
    }

    pub fn error(&self, key: &str, message: impl Into<String>) -> SweepError {
        SweepError::Config {
            origin: self.get(key).map_or(Origin::Flag, |e| e.origin),
            key: Some(key.to_string()),
            message: message.into(),
        }
    }

    pub fn number(&self, key: &str) -> Result<Option<f64>, SweepError> {
        let Some(entry) = self.get(key) else {
            return Ok(None);
        };
        let value = Expr::parse(&entry.value)
            .and_then(|e| e.eval_constant())
            .map_err(|m| self.error(key, format!("expected a number: {m}")))?;
        if !value.is_finite() {
            return Err(self.error(key, "value must be finite"));
        }
        Ok(Some(value))
    }

    pub fn number_or(&self, key: &str, default: f64) -> Result<f64, SweepError> {
        Ok(self.number(key)?.unwrap_or(default))
    }

    pub fn require_number(&self, key: &str) -> Result<f64, SweepError> {
        self.number(key)?.ok_or_else(|| SweepError::Config {
            origin: Origin::Flag,
            key: Some(key.to_string()),
            message: "required key missing".into(),
        })
    }

    pub fn count(&self, key: &str) -> Result<Option<usize>, SweepError> {
        let Some(entry) = self.get(key) else {
            return Ok(None);
        };
        entry.value.parse::<usize>().map(Some).map_err(|_| {
            self.error(
                key,
                format!("expected a non-negative integer, got `{}`", entry.value),
            )
        })
    }

    pub fn flag(&self, key: &str) -> Result<Option<bool>, SweepError> {
        let Some(entry) = self.get(key) else {
            return Ok(None);
        };
        match entry.value.as_str() {
            "1" | "true" | "yes" | "on" => Ok(Some(true)),
            "0" | "false" | "no" | "off" => Ok(Some(false)),
            other => Err(self.error(key, format!("expected a boolean, got `{other}`"))),
        }
    }

    /// Comma-separated list of numbers.
    pub fn numbers(&self, key: &str) -> Result<Option<Vec<f64>>, SweepError> {
        let Some(entry) = self.get(key) else {
            return Ok(None);
        };
        entry
            .value
            .split(',')
            .map(|s| {
                Expr::parse(s.trim())
                    .and_then(|e| e.eval_constant())
                    .map_err(|m| self.error(key, format!("bad list element `{}`: {m}", s.trim())))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    pub fn text(&self, key: &str) -> Option<&str> {
        self.get(key).map(|e| e.value.as_str())
    }
}
