//! Key=value config files: one `key = value` pair per line, `#` comments.
//! Keys use the long flag spelling; dashes and underscores are
//! interchangeable. Flags always win over file values; keys a command does
//! not consume are ignored so one file can drive a whole pipeline.

use std::collections::HashMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::AppError;

#[derive(Debug, Default)]
pub struct Config {
    values: HashMap<String, String>,
}

fn normalize(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('-', "_")
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self, AppError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| AppError::Msg(format!("cannot read config {}: {e}", path.display())))?;
        let mut values = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(AppError::Msg(format!(
                    "{}:{}: expected key = value, got {raw:?}",
                    path.display(),
                    lineno + 1
                )));
            };
            values.insert(normalize(key), value.trim().to_string());
        }
        Ok(Self { values })
    }

    /// Parsed value for `key`, `Ok(None)` when absent.
    pub fn get<T>(&self, key: &str) -> Result<Option<T>, AppError>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.values.get(&normalize(key)) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|e| {
                AppError::Msg(format!("config key {key}: cannot parse {raw:?}: {e}"))
            }),
        }
    }

    /// Flag wins, then the config file, then the default.
    pub fn pick<T>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, AppError>
    where
        T: FromStr,
        T::Err: Display,
    {
        match flag {
            Some(v) => Ok(v),
            None => Ok(self.get(key)?.unwrap_or(default)),
        }
    }

    /// Like `pick` without a default; `None` when neither source has it.
    pub fn pick_opt<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, AppError>
    where
        T: FromStr,
        T::Err: Display,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }
}
