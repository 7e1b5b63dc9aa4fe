//! Flat `key = value` config files and flag/file/default resolution.
//!
//! Keys are the long flag names (`target-mean`, `starts`, ...); underscores
//! are accepted in place of hyphens. Lines starting with `#` are comments.
//! List values are comma separated. A flag given on the command line always
//! wins over the file, and the file over built-in defaults.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{CliError, Result};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "OMORI_HAWKES_OUT_DIR";

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
    origin: String,
}

fn normalize_key(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('_', "-")
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Config(format!(
                    "{origin}:{}: expected `key = value`, got `{line}`",
                    lineno + 1
                )));
            };
            let key = normalize_key(key);
            let value = value.trim();
            let value = value
                .strip_prefix('"')
                .and_then(|v| v.strip_suffix('"'))
                .unwrap_or(value);
            if key.is_empty() {
                return Err(CliError::Config(format!("{origin}:{}: empty key", lineno + 1)));
            }
            if entries.insert(key.clone(), value.to_string()).is_some() {
                return Err(CliError::Config(format!(
                    "{origin}:{}: duplicate key `{key}`",
                    lineno + 1
                )));
            }
        }
        Ok(ConfigFile {
            entries,
            origin: origin.to_string(),
        })
    }

    pub fn resolver(&self) -> Resolver<'_> {
        Resolver {
            file: self,
            used: BTreeSet::new(),
        }
    }
}

/// Resolves settings for one command. Call [`Resolver::finish`] once every
/// setting has been looked up so that misspelled file keys are reported.
#[derive(Debug)]
pub struct Resolver<'a> {
    file: &'a ConfigFile,
    used: BTreeSet<String>,
}

fn parse_value<T>(origin: &str, key: &str, raw: &str) -> Result<T>
where
    T: FromStr,
    T::Err: Display,
{
    raw.trim()
        .parse()
        .map_err(|e| CliError::Config(format!("{origin}: invalid value `{raw}` for `{key}`: {e}")))
}

impl Resolver<'_> {
    fn file_value(&mut self, key: &str) -> Option<&str> {
        let key = normalize_key(key);
        let value = self.file.entries.get(&key).map(String::as_str);
        self.used.insert(key);
        value
    }

    pub fn get<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        let origin = self.file.origin.clone();
        match (flag, self.file_value(key)) {
            (Some(v), _) => Ok(Some(v)),
            (None, Some(raw)) => parse_value(&origin, key, raw).map(Some),
            (None, None) => Ok(None),
        }
    }

    pub fn get_or<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(self.get(key, flag)?.unwrap_or(default))
    }

    pub fn require<T>(&mut self, key: &str, flag: Option<T>) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.get(key, flag)?.ok_or_else(|| {
            CliError::Config(format!(
                "missing required setting `{key}` (flag --{key} or config key)"
            ))
        })
    }

    /// A list setting; an empty flag list falls through to the file.
    pub fn list<T>(&mut self, key: &str, flag: Vec<T>) -> Result<Vec<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        let origin = self.file.origin.clone();
        let raw = self.file_value(key).map(str::to_string);
        if !flag.is_empty() {
            return Ok(flag);
        }
        match raw {
            Some(raw) => raw
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| parse_value(&origin, key, s))
                .collect(),
            None => Ok(Vec::new()),
        }
    }

    /// A boolean switch: set by the flag, or by `true`/`false` in the file.
    pub fn switch(&mut self, key: &str, flag: bool) -> Result<bool> {
        let from_file = self.get::<bool>(key, None)?;
        Ok(flag || from_file.unwrap_or(false))
    }

    /// Output directory: flag, then file, then the environment, then `.`.
    pub fn out_dir(&mut self, flag: Option<PathBuf>) -> Result<PathBuf> {
        if let Some(dir) = self.get::<PathBuf>("out-dir", flag)? {
            return Ok(dir);
        }
        Ok(std::env::var_os(OUT_DIR_ENV)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(".")))
    }

    pub fn finish(self) -> Result<()> {
        let unknown: Vec<&str> = self
            .file
            .entries
            .keys()
            .filter(|k| !self.used.contains(*k))
            .map(String::as_str)
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(CliError::Config(format!(
                "{}: unknown key(s) for this command: {}",
                self.file.origin,
                unknown.join(", ")
            )))
        }
    }
}

/// Closed interval written as `lo,hi`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Interval(pub [f64; 2]);

impl FromStr for Interval {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let (lo, hi) = s
            .split_once(',')
            .ok_or_else(|| format!("expected `lo,hi`, got `{s}`"))?;
        let lo: f64 = lo.trim().parse().map_err(|e| format!("{e}"))?;
        let hi: f64 = hi.trim().parse().map_err(|e| format!("{e}"))?;
        Ok(Interval([lo, hi]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_file() {
        let f = ConfigFile::parse("# comment\n\nstarts = 4\ntarget_mean=\"5\"\n", "cfg").unwrap();
        let mut r = f.resolver();
        assert_eq!(r.get_or::<usize>("starts", None, 8).unwrap(), 4);
        assert_eq!(r.require::<f64>("target-mean", None).unwrap(), 5.0);
        r.finish().unwrap();
    }

    #[test]
    fn flags_beat_file_beat_defaults() {
        let f = ConfigFile::parse("starts = 4\n", "cfg").unwrap();
        let mut r = f.resolver();
        assert_eq!(r.get_or("starts", Some(12usize), 8).unwrap(), 12);
        assert_eq!(r.get_or::<u64>("seed", None, 3).unwrap(), 3);
        r.finish().unwrap();
    }

    #[test]
    fn rejects_malformed_and_unknown() {
        assert!(ConfigFile::parse("starts 4", "cfg").is_err());
        assert!(ConfigFile::parse("a=1\na=2", "cfg").is_err());
        let f = ConfigFile::parse("strats = 4\n", "cfg").unwrap();
        let mut r = f.resolver();
        r.get::<usize>("starts", None).unwrap();
        assert!(matches!(r.finish(), Err(CliError::Config(_))));
        let f = ConfigFile::parse("starts = many\n", "cfg").unwrap();
        assert!(f.resolver().get::<usize>("starts", None).is_err());
    }

    #[test]
    fn lists_and_switches() {
        let f = ConfigFile::parse("targets = 2, 5,10\npooled = true\n", "cfg").unwrap();
        let mut r = f.resolver();
        assert_eq!(r.list::<f64>("targets", vec![]).unwrap(), vec![2.0, 5.0, 10.0]);
        assert!(r.switch("pooled", false).unwrap());
        assert_eq!(r.list("targets", vec![7.0]).unwrap(), vec![7.0]);
    }

    #[test]
    fn interval_parsing() {
        assert_eq!("0.1, 0.9".parse::<Interval>().unwrap(), Interval([0.1, 0.9]));
        assert!("0.1".parse::<Interval>().is_err());
    }
}
