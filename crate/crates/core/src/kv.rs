//! Flat key-value text format used by run configs, dataset specs, policies
//! and certificates.
//!
//! One `key = value` pair per line, keys lowercase snake case, `#` starts a
//! comment. Writers emit keys in a stable order so artifacts can be diffed
//! across runs. Readers reject keys they do not recognize; a typo in a
//! safety threshold must fail loudly rather than silently fall back to a
//! default.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{CrcError, Result};

/// Parsed key-value file with consumption tracking for unknown-key checks.
#[derive(Debug, Clone)]
pub struct KvMap {
    entries: BTreeMap<String, String>,
    consumed: std::collections::BTreeSet<String>,
}

impl KvMap {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CrcError::Config(format!("line {}: expected `key = value`, got `{line}`", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() {
                return Err(CrcError::Config(format!("line {}: empty key", lineno + 1)));
            }
            if !key.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_') {
                return Err(CrcError::Config(format!(
                    "line {}: key `{key}` must be lowercase snake case",
                    lineno + 1
                )));
            }
            if entries.insert(key.to_string(), value.to_string()).is_some() {
                return Err(CrcError::Config(format!("duplicate key `{key}`")));
            }
        }
        Ok(KvMap { entries, consumed: Default::default() })
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn get_str(&mut self, key: &str) -> Option<String> {
        let v = self.entries.get(key).cloned();
        if v.is_some() {
            self.consumed.insert(key.to_string());
        }
        v
    }

    pub fn get_parsed<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        match self.get_str(key) {
            None => Ok(None),
            Some(s) => s
                .parse::<T>()
                .map(Some)
                .map_err(|_| CrcError::Config(format!("key `{key}`: cannot parse value `{s}`"))),
        }
    }

    pub fn require<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        self.get_parsed(key)?
            .ok_or_else(|| CrcError::Config(format!("missing required key `{key}`")))
    }

    /// Keys matching a prefix, in sorted order. Marks nothing consumed.
    pub fn keys_with_prefix(&self, prefix: &str) -> Vec<String> {
        self.entries
            .keys()
            .filter(|k| k.starts_with(prefix))
            .cloned()
            .collect()
    }

    /// Errors if any key was never consumed by a getter.
    pub fn finish(self) -> Result<()> {
        let unknown: Vec<_> = self
            .entries
            .keys()
            .filter(|k| !self.consumed.contains(*k))
            .cloned()
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(CrcError::Config(format!("unknown keys: {}", unknown.join(", "))))
        }
    }
}

/// Ordered writer; emits keys in insertion order.
#[derive(Debug, Default)]
pub struct KvWriter {
    buf: String,
}

impl KvWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn comment(&mut self, text: &str) {
        let _ = writeln!(self.buf, "# {text}");
    }

    pub fn put(&mut self, key: &str, value: impl std::fmt::Display) {
        debug_assert!(key.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_'));
        let _ = writeln!(self.buf, "{key} = {value}");
    }

    /// f64 written with enough digits to round-trip exactly.
    pub fn put_f64(&mut self, key: &str, value: f64) {
        let _ = writeln!(self.buf, "{key} = {value:?}");
    }

    pub fn into_string(self) -> String {
        self.buf
    }
}

/// Comma-separated f64 list, round-trip safe.
pub fn format_f64_list(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(",")
}

pub fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| CrcError::Config(format!("bad float `{tok}` in list")))
        })
        .collect()
}

pub fn parse_usize_list(s: &str) -> Result<Vec<usize>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .map_err(|_| CrcError::Config(format!("bad index `{tok}` in list")))
        })
        .collect()
}
