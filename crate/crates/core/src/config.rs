//! Flat `key=value` configuration files.
//!
//! One setting per line, `#` starts a comment line, blank lines are ignored.
//! Keys are case-insensitive and `_` is accepted for `-`, so `batch_size=32`
//! and `batch-size=32` are the same setting.

use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A single `key=value` entry with its 1-based line number.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

pub fn normalize_key(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('_', "-")
}

pub fn parse_key_values(text: &str, path: &Path) -> Result<Vec<Entry>> {
    let mut out: Vec<Entry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Ingest {
            path: path.to_path_buf(),
            line: i + 1,
            message: format!("expected key=value, found {line:?}"),
        })?;
        let key = normalize_key(k);
        if key.is_empty() {
            return Err(Error::Ingest {
                path: path.to_path_buf(),
                line: i + 1,
                message: "empty key".into(),
            });
        }
        if let Some(prev) = out.iter().find(|e| e.key == key) {
            return Err(Error::Ingest {
                path: path.to_path_buf(),
                line: i + 1,
                message: format!("duplicate key {key} (first set on line {})", prev.line),
            });
        }
        out.push(Entry {
            line: i + 1,
            key,
            value: v.trim().to_string(),
        });
    }
    Ok(out)
}

pub fn load_key_values(path: impl AsRef<Path>) -> Result<Vec<Entry>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_key_values(&text, path)
}

/// Parses `value` for setting `key`, naming both on failure.
pub fn parse_value<V: FromStr>(key: &str, value: &str) -> Result<V> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::contract(format!("invalid value {value:?} for {key}")))
}

/// A configuration struct that can be filled from string settings.
pub trait Settings {
    /// Applies one setting. Returns `Ok(false)` when the key does not belong
    /// to this struct, and an error when the value does not parse.
    fn set(&mut self, key: &str, value: &str) -> Result<bool>;

    /// Every setting as `(key, value)` in a stable order; feeding these back
    /// through [`set`](Settings::set) reproduces the struct.
    fn entries(&self) -> Vec<(&'static str, String)>;
}

pub(crate) fn entry(key: &'static str, value: impl Display) -> (&'static str, String) {
    (key, value.to_string())
}
