//! Parameter resolution: command-line flags override config-file entries,
//! defaults fill whatever remains, and config keys no command asked about
//! are rejected rather than silently ignored.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::{CliError, ParameterMap};

pub struct Resolver {
    file: BTreeMap<String, String>,
    consumed: BTreeSet<String>,
    resolved: ParameterMap,
}

impl Resolver {
    /// Loads the optional config file: one `key = value` pair per line,
    /// `#` starts a comment, blank lines are fine.
    pub fn from_file(path: Option<&Path>) -> Result<Self, CliError> {
        let mut file = BTreeMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)?;
            for (lineno, raw) in text.lines().enumerate() {
                let line = raw.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let Some((key, value)) = line.split_once('=') else {
                    return Err(CliError::Config(format!(
                        "{}:{}: expected `key = value`, got `{line}`",
                        path.display(),
                        lineno + 1
                    )));
                };
                file.insert(key.trim().to_string(), value.trim().to_string());
            }
        }
        Ok(Resolver {
            file,
            consumed: BTreeSet::new(),
            resolved: ParameterMap::new(),
        })
    }

    fn lookup<T: std::str::FromStr>(
        &mut self,
        key: &str,
        flag: Option<T>,
        default: T,
    ) -> Result<T, CliError> {
        self.consumed.insert(key.to_string());
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.file.get(key) {
            Some(text) => text.parse::<T>().map_err(|_| {
                CliError::Config(format!("config key `{key}`: cannot parse `{text}`"))
            }),
            None => Ok(default),
        }
    }

    pub fn f64(&mut self, key: &str, flag: Option<f64>, default: f64) -> Result<f64, CliError> {
        let v = self.lookup(key, flag, default)?;
        if !v.is_finite() {
            return Err(CliError::Config(format!(
                "parameter `{key}` must be finite, got {v}"
            )));
        }
        self.resolved.insert(key.to_string(), format!("{v}"));
        Ok(v)
    }

    pub fn usize(
        &mut self,
        key: &str,
        flag: Option<usize>,
        default: usize,
    ) -> Result<usize, CliError> {
        let v = self.lookup(key, flag, default)?;
        self.resolved.insert(key.to_string(), format!("{v}"));
        Ok(v)
    }

    /// Records a boolean switch in the manifest echo (switches live only
    /// on the command line, not in config files).
    pub fn note_flag(&mut self, key: &str, value: bool) {
        self.resolved.insert(key.to_string(), format!("{value}"));
    }

    /// Fails if the config file carried keys the command never asked for —
    /// almost always a typo worth stopping on.
    pub fn reject_unknown_keys(&self) -> Result<(), CliError> {
        let unknown: Vec<&str> = self
            .file
            .keys()
            .filter(|k| !self.consumed.contains(*k))
            .map(|k| k.as_str())
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(CliError::Config(format!(
                "unknown config key(s) for this command: {}",
                unknown.join(", ")
            )))
        }
    }

    pub fn into_resolved(self) -> ParameterMap {
        self.resolved
    }
}
