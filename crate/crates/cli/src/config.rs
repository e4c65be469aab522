//! Key-value run configuration. Every knob can live in a config file
//! (`key = value`, `#` comments) and be overridden by a flag; flags win.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::CliError;

#[derive(Debug, Default, Clone)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Settings::default());
        };
        if !path.is_file() {
            return Err(CliError::Validation(format!(
                "config file {} does not exist",
                path.display()
            )));
        }
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Validation(format!(
                    "{}:{}: expected `key = value`",
                    path.display(),
                    lineno + 1
                )));
            };
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Settings { values })
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn string(&self, flag: Option<String>, key: &str) -> Option<String> {
        flag.or_else(|| self.raw(key).map(str::to_string))
    }

    pub fn path(&self, flag: Option<PathBuf>, key: &str) -> Option<PathBuf> {
        flag.or_else(|| self.raw(key).map(PathBuf::from))
    }

    pub fn usize(&self, flag: Option<usize>, key: &str, default: usize) -> Result<usize, CliError> {
        if let Some(value) = flag {
            return Ok(value);
        }
        match self.raw(key) {
            Some(raw) => raw.parse().map_err(|_| {
                CliError::Validation(format!("config {key} = {raw:?} is not an integer"))
            }),
            None => Ok(default),
        }
    }

    pub fn u32(&self, flag: Option<u32>, key: &str, default: u32) -> Result<u32, CliError> {
        if let Some(value) = flag {
            return Ok(value);
        }
        match self.raw(key) {
            Some(raw) => raw.parse().map_err(|_| {
                CliError::Validation(format!("config {key} = {raw:?} is not an integer"))
            }),
            None => Ok(default),
        }
    }

    pub fn f64(&self, flag: Option<f64>, key: &str, default: f64) -> Result<f64, CliError> {
        if let Some(value) = flag {
            return Ok(value);
        }
        match self.raw(key) {
            Some(raw) => raw.parse().map_err(|_| {
                CliError::Validation(format!("config {key} = {raw:?} is not a number"))
            }),
            None => Ok(default),
        }
    }
}

pub fn require_file(path: &Path, what: &str) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Validation(format!(
            "{what} {} does not exist",
            path.display()
        )))
    }
}

pub fn require_dir(path: &Path, what: &str) -> Result<(), CliError> {
    if path.is_dir() {
        Ok(())
    } else {
        Err(CliError::Validation(format!(
            "{what} {} does not exist",
            path.display()
        )))
    }
}
