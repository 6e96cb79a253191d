//! Flat `key = value` config files and flag/config/default resolution.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;
use serde_json::Value;

use crate::CliError;

/// Parsed config file; `#` starts a comment, blank lines are skipped, later keys win.
#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", i + 1)))?;
            let k = k.trim();
            if k.is_empty() {
                return Err(CliError::Config(format!("line {}: empty key", i + 1)));
            }
            entries.insert(k.to_string(), v.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }
}

/// Resolves each setting as flag > config file > default and echoes the outcome.
pub struct Settings<'a> {
    file: &'a ConfigFile,
    echo: BTreeMap<String, Value>,
}

impl<'a> Settings<'a> {
    pub fn new(file: &'a ConfigFile) -> Self {
        Self {
            file,
            echo: BTreeMap::new(),
        }
    }

    pub fn get<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError>
    where
        T: FromStr + Serialize,
        T::Err: Display,
    {
        let v = match flag {
            Some(v) => v,
            None => match self.file.get(key) {
                Some(s) => s
                    .parse()
                    .map_err(|e| CliError::Config(format!("config key {key} = {s:?}: {e}")))?,
                None => default,
            },
        };
        self.record(key, &v);
        Ok(v)
    }

    /// Like `get` but without a default; the key must come from a flag or the file.
    pub fn require<T>(&mut self, key: &str, flag: Option<T>) -> Result<T, CliError>
    where
        T: FromStr + Serialize,
        T::Err: Display,
    {
        let v = match flag {
            Some(v) => v,
            None => match self.file.get(key) {
                Some(s) => s
                    .parse()
                    .map_err(|e| CliError::Config(format!("config key {key} = {s:?}: {e}")))?,
                None => return Err(CliError::Usage(format!("missing required setting --{key}"))),
            },
        };
        self.record(key, &v);
        Ok(v)
    }

    pub fn optional<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError>
    where
        T: FromStr + Serialize,
        T::Err: Display,
    {
        if flag.is_none() && self.file.get(key).is_none() {
            return Ok(None);
        }
        self.require(key, flag).map(Some)
    }

    pub fn record<T: Serialize>(&mut self, key: &str, v: &T) {
        self.echo.insert(
            key.to_string(),
            serde_json::to_value(v).unwrap_or(Value::Null),
        );
    }

    pub fn echo(&self) -> Value {
        Value::Object(self.echo.clone().into_iter().collect())
    }
}

/// `from:to:step` with an inclusive end point up to rounding.
pub fn parse_range(s: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || {
        CliError::Usage(format!(
            "range {s:?} must look like from:to:step with step > 0"
        ))
    };
    if parts.len() != 3 {
        return Err(bad());
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad())?;
    let (a, b, h) = (nums[0], nums[1], nums[2]);
    if !(h > 0.0) || !(b >= a) {
        return Err(bad());
    }
    let n = ((b - a) / h + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| a + h * i as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn later_keys_win_and_comments_vanish() {
        let c = ConfigFile::parse("# top\np = 1.5\n\nd=2 # inline\np=2\n").unwrap();
        assert_eq!(c.get("p"), Some("2"));
        assert_eq!(c.get("d"), Some("2"));
    }

    #[test]
    fn missing_equals_is_a_config_error() {
        assert!(matches!(
            ConfigFile::parse("p 1.5"),
            Err(CliError::Config(_))
        ));
    }

    #[test]
    fn flag_beats_file_beats_default() {
        let c = ConfigFile::parse("p = 2\nd = 3").unwrap();
        let mut s = Settings::new(&c);
        assert_eq!(s.get("p", Some(1.5), 9.0).unwrap(), 1.5);
        assert_eq!(s.get("d", None, 1usize).unwrap(), 3);
        assert_eq!(s.get("n", None, 4usize).unwrap(), 4);
        assert_eq!(s.echo()["p"], 1.5);
    }

    #[test]
    fn ranges_include_the_end() {
        let r = parse_range("9:13:0.5").unwrap();
        assert_eq!(r.len(), 9);
        assert!((r[8] - 13.0).abs() < 1e-12);
        assert!(parse_range("1:0:1").is_err());
    }
}
