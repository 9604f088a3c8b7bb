//! Plain-text `key = value` configuration files.
//!
//! The format is deliberately minimal: one `key = value` pair per line,
//! `#` starts a comment, blank lines are ignored. Scalars are plain
//! numbers, flat arrays are comma-separated, and lists of vectors (or
//! matrix rows) separate entries with `;`:
//!
//! ```text
//! # two-component mixture
//! weights = 0.9, 0.1
//! means = -10; 10
//! covariance = 1
//! grid = -15,15,300
//! region = voronoi:0
//! region = voronoi:1
//! ```
//!
//! Keys may repeat (`region` above); [`ConfigFile::get_all`] returns every
//! occurrence in file order.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}: expected `key = value`, got {text:?}")]
    Malformed { line: usize, text: String },
    #[error("missing required key {0:?}")]
    MissingKey(&'static str),
    #[error("key {key:?}: {message}")]
    BadValue { key: String, message: String },
}

/// A parsed configuration file: ordered `(key, value)` pairs.
#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    entries: Vec<(String, String)>,
    base_dir: PathBuf,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Malformed {
                line: i + 1,
                text: raw.to_string(),
            })?;
            entries.push((key.trim().to_string(), value.trim().to_string()));
        }
        Ok(Self {
            entries,
            base_dir: PathBuf::from("."),
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::parse(&text)?;
        cfg.base_dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        Ok(cfg)
    }

    /// Directory used to resolve relative paths referenced by the file
    /// (e.g. `data_file`).
    pub fn base_dir(&self) -> &Path {
        &self.base_dir
    }

    /// Last occurrence of `key`, if any.
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Every occurrence of `key`, in file order.
    pub fn get_all(&self, key: &str) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .collect()
    }

    pub fn require(&self, key: &'static str) -> Result<&str, ConfigError> {
        self.get(key).ok_or(ConfigError::MissingKey(key))
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.get(key).map(|v| parse_scalar(key, v)).transpose()
    }
}

pub(crate) fn parse_scalar(key: &str, value: &str) -> Result<f64, ConfigError> {
    value.trim().parse::<f64>().map_err(|_| ConfigError::BadValue {
        key: key.to_string(),
        message: format!("not a number: {value:?}"),
    })
}

/// Comma-separated list of numbers.
pub fn parse_f64_list(key: &str, value: &str) -> Result<Vec<f64>, ConfigError> {
    value
        .split(',')
        .map(|tok| parse_scalar(key, tok))
        .collect()
}

/// Semicolon-separated list of comma-separated vectors, all of equal length.
pub fn parse_vector_list(key: &str, value: &str) -> Result<Vec<Vec<f64>>, ConfigError> {
    let vectors: Vec<Vec<f64>> = value
        .split(';')
        .map(|v| parse_f64_list(key, v))
        .collect::<Result<_, _>>()?;
    if vectors.is_empty() {
        return Err(ConfigError::BadValue {
            key: key.to_string(),
            message: "empty vector list".to_string(),
        });
    }
    let dim = vectors[0].len();
    if vectors.iter().any(|v| v.len() != dim) {
        return Err(ConfigError::BadValue {
            key: key.to_string(),
            message: "vectors have mixed lengths".to_string(),
        });
    }
    Ok(vectors)
}

/// A region named in a config file: `voronoi:<i>` or
/// `box:<1|2|3>,A=<..>,M=<..>`.
#[derive(Debug, Clone, PartialEq)]
pub enum RegionSpec {
    Voronoi(usize),
    Box { which: u8, a: f64, m: f64 },
}

impl RegionSpec {
    pub fn parse(value: &str) -> Result<Self, ConfigError> {
        let bad = |message: String| ConfigError::BadValue {
            key: "region".to_string(),
            message,
        };
        let (kind, rest) = value
            .split_once(':')
            .ok_or_else(|| bad(format!("expected `voronoi:<i>` or `box:...`, got {value:?}")))?;
        match kind.trim() {
            "voronoi" => {
                let idx = rest
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| bad(format!("bad cell index {rest:?}")))?;
                Ok(RegionSpec::Voronoi(idx))
            }
            "box" => {
                let mut which = None;
                let mut a = None;
                let mut m = None;
                for tok in rest.split(',') {
                    let tok = tok.trim();
                    if let Some(v) = tok.strip_prefix("A=") {
                        a = Some(parse_scalar("region.A", v)?);
                    } else if let Some(v) = tok.strip_prefix("M=") {
                        m = Some(parse_scalar("region.M", v)?);
                    } else {
                        which = Some(
                            tok.parse::<u8>()
                                .map_err(|_| bad(format!("bad box index {tok:?}")))?,
                        );
                    }
                }
                let which = which.ok_or_else(|| bad("missing box index".to_string()))?;
                if !(1..=3).contains(&which) {
                    return Err(bad(format!("box index must be 1..=3, got {which}")));
                }
                let a = a.ok_or_else(|| bad("missing A=".to_string()))?;
                let m = m.ok_or_else(|| bad("missing M=".to_string()))?;
                Ok(RegionSpec::Box { which, a, m })
            }
            other => Err(bad(format!("unknown region kind {other:?}"))),
        }
    }
}
