//! Flat `key = value` configuration files and list-valued options.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Parses a configuration file: one `key = value` per line, `#` starts a
/// comment, later keys override earlier ones. Keys are normalized to use
/// `-` rather than `_`.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Parse(format!("config line {}: expected key = value", lineno + 1))
        })?;
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() {
            return Err(Error::Parse(format!(
                "config line {}: empty key",
                lineno + 1
            )));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

/// Comma-separated reals.
pub fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    let out = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse(format!("invalid number '{t}'")))
        })
        .collect::<Result<Vec<_>>>()?;
    if out.is_empty() {
        return Err(Error::Parse("empty list".into()));
    }
    Ok(out)
}

/// Comma-separated integers and inclusive ranges such as `1..20`.
pub fn parse_usize_list(s: &str) -> Result<Vec<usize>> {
    let int = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| Error::Parse(format!("invalid integer '{}'", t.trim())))
    };
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        match item.split_once("..") {
            Some((a, b)) => {
                let (a, b) = (int(a)?, int(b.trim_start_matches('='))?);
                if a > b {
                    return Err(Error::Parse(format!("empty range '{item}'")));
                }
                out.extend(a..=b);
            }
            None => out.push(int(item)?),
        }
    }
    if out.is_empty() {
        return Err(Error::Parse("empty list".into()));
    }
    Ok(out)
}

/// Single-sample estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorKind {
    Iq,
    Tsallis,
    Renyi,
    Shannon,
    Spectrum,
    SharmaMittal,
    MutualInformation,
}

impl EstimatorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Iq => "iq",
            Self::Tsallis => "tsallis",
            Self::Renyi => "renyi",
            Self::Shannon => "shannon",
            Self::Spectrum => "spectrum",
            Self::SharmaMittal => "sharma-mittal",
            Self::MutualInformation => "mi",
        }
    }

    /// Whether the estimator takes an order `q`.
    pub fn uses_q(self) -> bool {
        matches!(
            self,
            Self::Iq | Self::Tsallis | Self::Renyi | Self::SharmaMittal
        )
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(
            match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
                "iq" => Self::Iq,
                "tsallis" => Self::Tsallis,
                "renyi" => Self::Renyi,
                "shannon" => Self::Shannon,
                "spectrum" => Self::Spectrum,
                "sharma-mittal" => Self::SharmaMittal,
                "mi" | "mutual-information" => Self::MutualInformation,
                other => return Err(Error::Parse(format!("unknown estimator '{other}'"))),
            },
        )
    }
}

/// Two-sample estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DivergenceKind {
    Kl,
    Bregman,
    Jensen,
    CrossEntropy,
    CrossIq,
}

impl DivergenceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Kl => "kl",
            Self::Bregman => "bregman",
            Self::Jensen => "jensen",
            Self::CrossEntropy => "cross-entropy",
            Self::CrossIq => "cross-iq",
        }
    }

    pub fn uses_q(self) -> bool {
        matches!(self, Self::Bregman | Self::Jensen | Self::CrossIq)
    }
}

impl fmt::Display for DivergenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DivergenceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(
            match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
                "kl" => Self::Kl,
                "bregman" => Self::Bregman,
                "jensen" => Self::Jensen,
                "cross-entropy" => Self::CrossEntropy,
                "cross-iq" => Self::CrossIq,
                other => return Err(Error::Parse(format!("unknown divergence '{other}'"))),
            },
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_lines() {
        let map = parse_config("# sweep\nq = 1.1, 4\nreps=10 # inline\n\nk_max = 3\n").unwrap();
        assert_eq!(map["q"], "1.1, 4");
        assert_eq!(map["reps"], "10");
        assert_eq!(map["k-max"], "3");
        assert!(parse_config("just words").is_err());
    }

    #[test]
    fn lists() {
        assert_eq!(parse_usize_list("1..3,7").unwrap(), vec![1, 2, 3, 7]);
        assert_eq!(parse_usize_list("2..=4").unwrap(), vec![2, 3, 4]);
        assert!(parse_usize_list("5..2").is_err());
        assert!(parse_usize_list("a").is_err());
        assert_eq!(parse_f64_list("0.75, 2").unwrap(), vec![0.75, 2.0]);
        assert!(parse_f64_list("").is_err());
        assert!(parse_f64_list("nan").is_err());
    }

    #[test]
    fn names_round_trip() {
        for name in [
            "iq",
            "tsallis",
            "renyi",
            "shannon",
            "spectrum",
            "sharma-mittal",
            "mi",
        ] {
            assert_eq!(name.parse::<EstimatorKind>().unwrap().as_str(), name);
        }
        for name in ["kl", "bregman", "jensen", "cross-entropy", "cross-iq"] {
            assert_eq!(name.parse::<DivergenceKind>().unwrap().as_str(), name);
        }
        assert!("entropy".parse::<EstimatorKind>().is_err());
    }
}
