//! Optional `key = value` config files. Keys are the long flag names; an
//! explicit command-line flag always wins over the file.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::errors::{CliError, CliResult};

#[derive(Debug, Default, Clone)]
pub struct ConfigMap {
    values: BTreeMap<String, String>,
}

impl ConfigMap {
    pub fn load(path: Option<&Path>) -> CliResult<ConfigMap> {
        let mut values = BTreeMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Runtime(format!("config {}: {e}", path.display())))?;
            for (idx, raw) in text.lines().enumerate() {
                let line = raw.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    CliError::Validation(format!(
                        "config {} line {}: expected `key = value`",
                        path.display(),
                        idx + 1
                    ))
                })?;
                values.insert(key.trim().to_string(), value.trim().to_string());
            }
        }
        Ok(ConfigMap { values })
    }

    /// Flag value, falling back to the config file, then the default.
    pub fn resolve<T: FromStr + Clone>(
        &self,
        flag: Option<T>,
        key: &str,
        default: T,
    ) -> CliResult<T> {
        Ok(self.lookup(flag, key)?.unwrap_or(default))
    }

    /// Flag value or config value; error when neither is present.
    pub fn resolve_required<T: FromStr + Clone>(&self, flag: Option<T>, key: &str) -> CliResult<T> {
        self.lookup(flag, key)?
            .ok_or_else(|| CliError::Usage(format!("missing required option --{key}")))
    }

    pub fn lookup<T: FromStr + Clone>(&self, flag: Option<T>, key: &str) -> CliResult<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.values.get(key) {
            Some(text) => text
                .parse::<T>()
                .map(Some)
                .map_err(|_| CliError::Validation(format!("config key `{key}`: bad value `{text}`"))),
            None => Ok(None),
        }
    }

    pub fn flag_present(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }
}
