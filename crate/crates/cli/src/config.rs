//! Key-value config files merged under command-line flags.
//!
//! ```text
//! # comment
//! kernel = birth-death:p=1/3
//! n-list = 10,20,40
//! ```
//!
//! Keys are the long flag names. A flag given on the command line wins over
//! the file, and the file wins over the built-in default.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::config(format!("config line {}: expected `key = value`", i + 1)))?;
            let key = k.trim().to_string();
            if entries.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(CliError::config(format!("config line {}: duplicate key `{key}`", i + 1)));
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Keys not consumed by the selected subcommand.
    pub fn unknown_keys<'a>(&'a self, known: &[&str]) -> Vec<&'a str> {
        self.entries.keys().map(String::as_str).filter(|k| !known.contains(k)).collect()
    }

    /// Flag, else file entry, else `None`.
    pub fn pick<T>(&self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|e| CliError::config(format!("config key `{key}` = `{v}`: {e}"))))
            .transpose()
    }

    pub fn pick_or<T>(&self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        Ok(self.pick(key, flag)?.unwrap_or(default))
    }

    pub fn require<T>(&self, key: &str, flag: Option<T>) -> Result<T, CliError>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        self.pick(key, flag)?.ok_or_else(|| CliError::config(format!("missing required setting `{key}`")))
    }
}

/// Comma-separated list, e.g. `10,20,40`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct List<T>(pub Vec<T>);

impl<T: FromStr> FromStr for List<T>
where
    T::Err: fmt::Display,
{
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let items = s
            .split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(|p| p.parse::<T>().map_err(|e| format!("`{p}`: {e}")))
            .collect::<Result<Vec<_>, _>>()?;
        if items.is_empty() {
            return Err("empty list".into());
        }
        Ok(Self(items))
    }
}

impl<T: fmt::Display> fmt::Display for List<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Decimal or simple fraction such as `1/3`.
pub fn parse_real(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| format!("bad number `{s}`"))?;
            let b: f64 = b.trim().parse().map_err(|_| format!("bad number `{s}`"))?;
            a / b
        }
        None => s.parse().map_err(|_| format!("bad number `{s}`"))?,
    };
    if !v.is_finite() {
        return Err(format!("`{s}` is not finite"));
    }
    Ok(v)
}

/// A real given on the command line or in a config file; keeps its source
/// text so output headers echo the input verbatim.
#[derive(Debug, Clone, PartialEq)]
pub struct Real {
    pub value: f64,
    text: String,
}

impl FromStr for Real {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(Self { value: parse_real(s)?, text: s.trim().to_string() })
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

/// `name:key=value,key=value` with an optional parameter list.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedParams {
    pub name: String,
    pub params: BTreeMap<String, String>,
}

impl NamedParams {
    pub fn parse(s: &str) -> Result<Self, String> {
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut params = BTreeMap::new();
        for part in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part.split_once('=').ok_or_else(|| format!("expected key=value, got `{part}`"))?;
            params.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Self { name: name.trim().to_string(), params })
    }

    pub fn real(&self, key: &str) -> Result<f64, String> {
        let v = self.params.get(key).ok_or_else(|| format!("`{}` needs parameter `{key}`", self.name))?;
        parse_real(v)
    }

    pub fn real_or(&self, key: &str, default: f64) -> Result<f64, String> {
        match self.params.get(key) {
            Some(v) => parse_real(v),
            None => Ok(default),
        }
    }

    pub fn expect_keys(&self, keys: &[&str]) -> Result<(), String> {
        match self.params.keys().find(|k| !keys.contains(&k.as_str())) {
            Some(k) => Err(format!("`{}` has no parameter `{k}`", self.name)),
            None => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_file() {
        let c = ConfigFile::parse("# sweep\nn-ref = 500\nx = 2\n\n").unwrap();
        assert_eq!(c.pick_or("n-ref", Some(900usize), 1).unwrap(), 900);
        assert_eq!(c.pick_or("n-ref", None::<usize>, 1).unwrap(), 500);
        assert_eq!(c.pick_or("horizon", None::<usize>, 7).unwrap(), 7);
        assert!(c.pick::<usize>("x", None).unwrap() == Some(2));
        assert_eq!(c.unknown_keys(&["x"]), vec!["n-ref"]);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(ConfigFile::parse("n-ref 500").is_err());
        assert!(ConfigFile::parse("a = 1\na = 2").is_err());
        let c = ConfigFile::parse("n-ref = many").unwrap();
        assert!(c.pick::<usize>("n-ref", None).is_err());
    }

    #[test]
    fn lists_and_reals() {
        let l: List<usize> = "10, 20,40".parse().unwrap();
        assert_eq!(l.0, vec![10, 20, 40]);
        assert_eq!(l.to_string(), "10,20,40");
        assert!("".parse::<List<usize>>().is_err());
        assert_eq!(parse_real("1/3").unwrap(), 1.0 / 3.0);
        let r: Real = " 0.25 ".parse().unwrap();
        assert_eq!((r.value, r.to_string()), (0.25, "0.25".to_string()));
        let k = NamedParams::parse("mm1:lambda=1,mu=2").unwrap();
        assert_eq!(k.name, "mm1");
        assert_eq!(k.real("mu").unwrap(), 2.0);
        assert!(k.expect_keys(&["lambda"]).is_err());
    }
}
