//! `key = value` experiment configs. Every key read is recorded with its
//! resolved value so the run can be replayed from `meta.txt`.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Config {
    entries: BTreeMap<String, String>,
    base: PathBuf,
    resolved: RefCell<BTreeMap<String, String>>,
    used: RefCell<BTreeSet<String>>,
}

impl Config {
    /// Parses config text; relative paths resolve against `base`.
    pub fn parse(text: &str, base: impl Into<PathBuf>) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("line {}", ln + 1), "expected `key = value`"))?;
            let k = k.trim();
            if k.is_empty() || !k.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_') {
                return Err(Error::config(k, format!("line {}: keys use lowercase letters, digits and `_`", ln + 1)));
            }
            if entries.insert(k.to_string(), v.trim().to_string()).is_some() {
                return Err(Error::config(k, "key given twice"));
            }
        }
        Ok(Config {
            entries,
            base: base.into(),
            resolved: RefCell::new(BTreeMap::new()),
            used: RefCell::new(BTreeSet::new()),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let base = if base.as_os_str().is_empty() { PathBuf::from(".") } else { base };
        Self::parse(&text, std::path::absolute(&base).unwrap_or(base))
    }

    pub fn base(&self) -> &Path {
        &self.base
    }

    pub fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    /// Raw value of `key`, if present; marks it used.
    pub fn raw(&self, key: &str) -> Option<String> {
        self.used.borrow_mut().insert(key.to_string());
        self.entries.get(key).cloned()
    }

    fn record(&self, key: &str, value: impl Display) {
        self.resolved.borrow_mut().insert(key.to_string(), value.to_string());
    }

    /// Records a derived value for `meta.txt` without reading a key.
    pub fn note(&self, key: &str, value: impl Display) {
        self.record(key, value)
    }

    pub fn require<T>(&self, key: &str) -> Result<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let raw = self.raw(key).ok_or_else(|| Error::config(key, "missing"))?;
        let v: T = raw.parse().map_err(|e: T::Err| Error::config(key, e.to_string()))?;
        self.record(key, &raw);
        Ok(v)
    }

    pub fn get<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        if self.has(key) {
            self.require(key).map(Some)
        } else {
            self.raw(key);
            Ok(None)
        }
    }

    pub fn get_or<T>(&self, key: &str, default: T) -> Result<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        match self.get(key)? {
            Some(v) => Ok(v),
            None => {
                self.record(key, &default);
                Ok(default)
            }
        }
    }

    /// Comma-separated list.
    pub fn list<T>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T: FromStr,
        T::Err: Display,
    {
        let Some(raw) = self.raw(key) else {
            return Ok(None);
        };
        let v = raw
            .split(',')
            .map(|s| s.trim().parse::<T>().map_err(|e| Error::config(key, format!("`{}`: {e}", s.trim()))))
            .collect::<Result<Vec<T>>>()?;
        if v.is_empty() {
            return Err(Error::config(key, "empty list"));
        }
        self.record(key, &raw);
        Ok(Some(v))
    }

    pub fn list_or<T>(&self, key: &str, default: &[T]) -> Result<Vec<T>>
    where
        T: FromStr + Display + Clone,
        T::Err: Display,
    {
        match self.list(key)? {
            Some(v) => Ok(v),
            None => {
                let joined = default.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
                self.record(key, joined);
                Ok(default.to_vec())
            }
        }
    }

    /// Positive, strictly decreasing list.
    pub fn eps_list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        let v = self.list_or(key, default)?;
        if v.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
            return Err(Error::config(key, "values must be positive"));
        }
        if v.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::config(key, "values must be strictly decreasing"));
        }
        Ok(v)
    }

    /// A path relative to the config directory; recorded as absolute.
    pub fn path(&self, key: &str, raw: &str) -> PathBuf {
        let p = self.base.join(raw);
        self.record(key, p.display());
        p
    }

    /// Resolves a path without recording it.
    pub fn resolve(&self, raw: &str) -> PathBuf {
        self.base.join(raw)
    }

    /// Errors on keys that were never read.
    pub fn check_unused(&self) -> Result<()> {
        let used = self.used.borrow();
        match self.entries.keys().find(|k| !used.contains(*k)) {
            Some(k) => Err(Error::config(k.as_str(), "unknown key for this experiment")),
            None => Ok(()),
        }
    }

    /// Resolved config in the same grammar, loadable as a config.
    pub fn resolved_text(&self) -> String {
        let mut s = format!("# freedisc {}\n", env!("CARGO_PKG_VERSION"));
        for (k, v) in self.resolved.borrow().iter() {
            s.push_str(&format!("{k} = {v}\n"));
        }
        s
    }
}
