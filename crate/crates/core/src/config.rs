//! Run configuration: flat `key = value` files and their validation.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{FolstabError, Result};
use crate::manifolds::foliation::FoliationKind;
use crate::manifolds::space::SpaceId;

pub const MIN_RESOLUTION: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Harmonicity,
    Lck,
    Spectrum,
    StabilityIdentity,
    SecondVariation,
    Instability,
    Classify,
}

impl Suite {
    /// Dependency order: foliation geometry, complex structure, spectra,
    /// instability, classification.
    pub const ALL: [Suite; 7] = [
        Suite::Harmonicity,
        Suite::Lck,
        Suite::Spectrum,
        Suite::StabilityIdentity,
        Suite::SecondVariation,
        Suite::Instability,
        Suite::Classify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Harmonicity => "harmonicity",
            Suite::Lck => "lck",
            Suite::Spectrum => "spectrum",
            Suite::StabilityIdentity => "stability-identity",
            Suite::SecondVariation => "second-variation",
            Suite::Instability => "instability",
            Suite::Classify => "classify",
        }
    }

    /// Comma-separated suite names; `all` expands to every suite.
    pub fn parse_list(s: &str) -> Result<Vec<Suite>> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            if part == "all" {
                out.extend(Suite::ALL);
            } else {
                out.push(part.parse()?);
            }
        }
        out.sort();
        out.dedup();
        Ok(out)
    }
}

impl FromStr for Suite {
    type Err = FolstabError;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| FolstabError::Config(format!("unknown suite '{s}' (expected one of lck, harmonicity, spectrum, stability-identity, instability, classify, second-variation, all)")))
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = FolstabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(FolstabError::Config(format!("unknown format '{s}' (expected json or csv)"))),
        }
    }
}

/// Resolution `12` (every axis) or `16x16x8` (per axis).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Resolution {
    Uniform(usize),
    PerAxis(Vec<usize>),
}

impl Resolution {
    pub fn for_dim(&self, dim: usize) -> Result<Vec<usize>> {
        let res = match self {
            Resolution::Uniform(r) => vec![*r; dim],
            Resolution::PerAxis(v) if v.len() == dim => v.clone(),
            Resolution::PerAxis(v) => {
                return Err(FolstabError::Config(format!("resolution has {} axes, the space has dimension {dim}", v.len())))
            }
        };
        Ok(res)
    }
}

impl FromStr for Resolution {
    type Err = FolstabError;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<usize> = s
            .split('x')
            .map(|p| p.trim().parse().map_err(|_| FolstabError::Config(format!("malformed resolution '{s}'"))))
            .collect::<Result<_>>()?;
        if let Some(r) = parts.iter().find(|&&r| r < MIN_RESOLUTION) {
            return Err(FolstabError::Config(format!("resolution {r} is below the minimum of {MIN_RESOLUTION} per axis")));
        }
        Ok(if parts.len() == 1 { Resolution::Uniform(parts[0]) } else { Resolution::PerAxis(parts) })
    }
}

impl fmt::Display for Resolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Resolution::Uniform(r) => write!(f, "{r}"),
            Resolution::PerAxis(v) => {
                let s: Vec<String> = v.iter().map(|r| r.to_string()).collect();
                f.write_str(&s.join("x"))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub space: SpaceId,
    pub foliation: FoliationKind,
    pub res: Resolution,
    pub suites: Vec<Suite>,
    pub seed: u64,
    pub tolerance_scale: f64,
    /// Seeded smooth sections used by the identity and second-variation suites.
    pub sections: usize,
    /// Eigenvalues requested from the spectrum suite.
    pub eigenvalues: usize,
    pub catalog: Option<String>,
    pub names: Vec<String>,
}

pub const KEYS: [&str; 10] =
    ["space", "foliation", "res", "suite", "seed", "tolerance-scale", "sections", "eigenvalues", "catalog", "name"];

impl RunConfig {
    /// Builds a config from key/value pairs; unknown keys are rejected.
    pub fn from_pairs(pairs: &BTreeMap<String, String>) -> Result<Self> {
        if let Some(k) = pairs.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(FolstabError::Config(format!("unknown config key '{k}'")));
        }
        let get = |k: &str| pairs.get(k).map(String::as_str);
        let num = |k: &str, default: u64| -> Result<u64> {
            get(k).map_or(Ok(default), |v| v.parse().map_err(|_| FolstabError::Config(format!("{k} must be a non-negative integer, got '{v}'"))))
        };
        let space = SpaceId::parse(get("space").unwrap_or("flat_torus:extents=1x1")).map_err(as_config)?;
        let foliation = FoliationKind::parse(get("foliation").unwrap_or("linear")).map_err(as_config)?;
        let tolerance_scale = match get("tolerance-scale") {
            Some(v) => v.parse::<f64>().map_err(|_| FolstabError::Config(format!("tolerance-scale must be a number, got '{v}'")))?,
            None => 1.0,
        };
        if !(tolerance_scale.is_finite() && tolerance_scale > 0.0) {
            return Err(FolstabError::Config(format!("tolerance-scale must be positive, got {tolerance_scale}")));
        }
        let cfg = RunConfig {
            space,
            foliation,
            res: get("res").unwrap_or("16").parse()?,
            suites: Suite::parse_list(get("suite").unwrap_or("all"))?,
            seed: num("seed", 0)?,
            tolerance_scale,
            sections: num("sections", 5)? as usize,
            eigenvalues: num("eigenvalues", 6)? as usize,
            catalog: get("catalog").map(str::to_string),
            names: get("name").map(|s| s.split(';').map(|n| n.trim().to_string()).filter(|n| !n.is_empty()).collect()).unwrap_or_default(),
        };
        if cfg.sections == 0 || cfg.eigenvalues == 0 {
            return Err(FolstabError::Config("sections and eigenvalues must be positive".into()));
        }
        Ok(cfg)
    }

    /// Canonical `key = value` lines, sorted by key.
    pub fn canonical(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("space".into(), self.space.to_string());
        m.insert("foliation".into(), self.foliation.to_string());
        m.insert("res".into(), self.res.to_string());
        m.insert("suite".into(), self.suites.iter().map(|s| s.name()).collect::<Vec<_>>().join(","));
        m.insert("seed".into(), self.seed.to_string());
        m.insert("tolerance-scale".into(), format!("{:?}", self.tolerance_scale));
        m.insert("sections".into(), self.sections.to_string());
        m.insert("eigenvalues".into(), self.eigenvalues.to_string());
        if let Some(c) = &self.catalog {
            m.insert("catalog".into(), c.clone());
        }
        if !self.names.is_empty() {
            m.insert("name".into(), self.names.join(";"));
        }
        m
    }
}

fn as_config(e: FolstabError) -> FolstabError {
    match e {
        FolstabError::Config(_) => e,
        other => FolstabError::Config(other.to_string()),
    }
}

/// Parses `key = value` lines. Blank lines and lines starting with `#` are
/// skipped; later keys override earlier ones.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| FolstabError::Config(format!("line {}: expected key = value", i + 1)))?;
        let k = k.trim().replace('_', "-");
        if k.is_empty() {
            return Err(FolstabError::Config(format!("line {}: empty key", i + 1)));
        }
        out.insert(k, v.trim().to_string());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kv_round_trip() {
        let text = "# comment\nspace = round_sphere:n=3\nfoliation=hopf\nres = 12\nsuite = instability, spectrum\ntolerance_scale = 2\n";
        let cfg = RunConfig::from_pairs(&parse_kv(text).unwrap()).unwrap();
        assert_eq!(cfg.suites, vec![Suite::Spectrum, Suite::Instability]);
        assert_eq!(cfg.tolerance_scale, 2.0);
        let again = RunConfig::from_pairs(&cfg.canonical()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn resolution_below_minimum_is_rejected() {
        assert!(matches!("7".parse::<Resolution>(), Err(FolstabError::Config(_))));
        assert!(matches!("16x4".parse::<Resolution>(), Err(FolstabError::Config(_))));
        assert_eq!("16x8".parse::<Resolution>().unwrap(), Resolution::PerAxis(vec![16, 8]));
        assert!(Resolution::PerAxis(vec![8, 8]).for_dim(3).is_err());
    }

    #[test]
    fn bad_keys_and_suites() {
        let mut m = BTreeMap::new();
        m.insert("colour".to_string(), "red".to_string());
        assert!(RunConfig::from_pairs(&m).is_err());
        assert!(Suite::parse_list("spectrum,bogus").is_err());
        assert_eq!(Suite::parse_list("all").unwrap().len(), 7);
        assert!(parse_kv("no equals sign").is_err());
    }
}
