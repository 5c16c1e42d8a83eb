//! Flat `key = value` settings: defaults, then a config file, then flags.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

/// Failure classes, mapped onto exit codes by `main`.
#[derive(Debug)]
pub enum CliError {
    /// A required value is absent; usage text follows the message.
    Missing(String),
    Config(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Missing(_) | CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Missing(key) => {
                write!(f, "missing required value `{key}` (flag --{} or config key)", key.replace('_', "-"))
            }
            CliError::Config(msg) | CliError::Runtime(msg) => f.write_str(msg),
        }
    }
}

impl From<knnsp::Error> for CliError {
    fn from(e: knnsp::Error) -> Self {
        use knnsp::Error::*;
        match e {
            InvalidArgument(_)
            | InvalidModel(_)
            | Parse { .. }
            | NotSubadditive { .. }
            | NotIncreasing { .. }
            | Inadmissible(_)
            | NoAdmissibleLambda { .. }
            | DomainViolation { .. }
            | DimensionMismatch { .. }
            | InvalidVertex { .. } => CliError::Config(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Ordered settings restricted to a fixed key set.
#[derive(Debug, Clone)]
pub struct Settings {
    keys: &'static [&'static str],
    values: Vec<(String, String)>,
}

impl Settings {
    pub fn new(keys: &'static [&'static str]) -> Self {
        Self { keys, values: Vec::new() }
    }

    /// Reads a config file. Keys outside this command's set are rejected.
    pub fn load(keys: &'static [&'static str], path: Option<&Path>) -> CliResult<Self> {
        let mut s = Self::new(keys);
        let Some(path) = path else { return Ok(s) };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        for (k, v) in parse_flat(&text, path)? {
            s.set(&k, v)?;
        }
        Ok(s)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) -> CliResult<()> {
        if !self.keys.contains(&key) {
            return Err(CliError::Config(format!("unknown key `{key}`")));
        }
        let value = value.into();
        match self.values.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.values.push((key.to_string(), value)),
        }
        Ok(())
    }

    pub fn set_default(&mut self, key: &str, value: impl Into<String>) -> CliResult<()> {
        if self.raw(key).is_none() {
            self.set(key, value)?;
        }
        Ok(())
    }

    /// Applies a flag value when present.
    pub fn flag<T: ToString>(&mut self, key: &str, value: Option<T>) -> CliResult<()> {
        match value {
            Some(v) => self.set(key, v.to_string()),
            None => Ok(()),
        }
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn get<T: FromStr>(&self, key: &str) -> CliResult<Option<T>>
    where
        T::Err: fmt::Display,
    {
        self.raw(key)
            .map(|v| v.parse::<T>().map_err(|e| CliError::Config(format!("bad value `{v}` for `{key}`: {e}"))))
            .transpose()
    }

    pub fn require<T: FromStr>(&self, key: &str) -> CliResult<T>
    where
        T::Err: fmt::Display,
    {
        self.get(key)?.ok_or_else(|| CliError::Missing(key.to_string()))
    }

    /// All values in key order, as config text.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for key in self.keys {
            if let Some(v) = self.raw(key) {
                out.push_str(&format!("{key} = {v}\n"));
            }
        }
        out
    }

    pub fn pairs(&self) -> &[(String, String)] {
        &self.values
    }
}

fn parse_flat(text: &str, path: &Path) -> CliResult<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split_once('#').map_or(raw, |(a, _)| a).trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("{}:{}: expected `key = value`", path.display(), lineno + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// A point written as space or comma separated coordinates.
pub fn parse_point(s: &str) -> CliResult<Vec<f64>> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|e| CliError::Config(format!("bad coordinate `{t}`: {e}"))))
        .collect()
}
