use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generate::MapKind;

/// A level to extract: absolute, or a fraction of the estimated min chord.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeltaSpec {
    Absolute(f64),
    Fraction(f64),
}

impl DeltaSpec {
    pub fn resolve(self, d_hat: f64) -> f64 {
        match self {
            DeltaSpec::Absolute(d) => d,
            DeltaSpec::Fraction(f) => f * d_hat,
        }
    }

    pub fn fraction(self) -> Option<f64> {
        match self {
            DeltaSpec::Fraction(f) => Some(f),
            DeltaSpec::Absolute(_) => None,
        }
    }
}

impl std::str::FromStr for DeltaSpec {
    type Err = Error;

    /// `0.5D` (or `0.5*D`) is a fraction of D_hat; a bare number is absolute.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Config(format!("bad delta {s:?}"));
        if let Some(f) = s.strip_suffix('D').or_else(|| s.strip_suffix('d')) {
            let f = f.trim_end_matches('*').trim();
            let f = if f.is_empty() { 1.0 } else { f.parse::<f64>().map_err(|_| bad())? };
            return Ok(DeltaSpec::Fraction(f));
        }
        s.parse::<f64>().map(DeltaSpec::Absolute).map_err(|_| bad())
    }
}

impl std::fmt::Display for DeltaSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DeltaSpec::Absolute(d) => write!(f, "{d}"),
            DeltaSpec::Fraction(x) => write!(f, "{x}D"),
        }
    }
}

impl Serialize for DeltaSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for DeltaSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(x) => Ok(DeltaSpec::Absolute(x)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub kind: MapKind,
    #[serde(default)]
    pub seed: u64,
    /// Points for a generated hull when no mesh file is given.
    #[serde(default = "default_points")]
    pub points: usize,
}

fn default_points() -> usize {
    20
}

fn default_deltas() -> Vec<DeltaSpec> {
    vec![DeltaSpec::Fraction(0.25), DeltaSpec::Fraction(0.5), DeltaSpec::Fraction(0.75)]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mesh: Option<PathBuf>,
    pub map: Option<PathBuf>,
    pub generator: Option<GeneratorSpec>,
    /// Seed for the center search sampling.
    pub seed: u64,
    pub deltas: Vec<DeltaSpec>,
    pub tol_residual: f64,
    /// Absolute level tolerance; defaults to 1e-4 times the estimated min chord.
    pub tol_level: Option<f64>,
    pub max_depth: u32,
    pub out_dir: Option<PathBuf>,
    pub svg: bool,
    pub obj: bool,
    pub report: bool,
    /// Samples for the brute-force oracle; 0 skips it.
    pub oracle_samples: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mesh: None,
            map: None,
            generator: None,
            seed: 0,
            deltas: default_deltas(),
            tol_residual: 1e-6,
            tol_level: None,
            max_depth: 8,
            out_dir: None,
            svg: false,
            obj: false,
            report: true,
            oracle_samples: 0,
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mesh.is_none() && self.generator.is_none() {
            return Err(Error::Config("need a mesh file or a generator".into()));
        }
        if self.map.is_none() && self.generator.is_none() {
            return Err(Error::Config("need a map file or a generator".into()));
        }
        if !(self.tol_residual > 0.0) || self.tol_level.is_some_and(|t| !(t > 0.0)) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if self.max_depth == 0 || self.max_depth > 20 {
            return Err(Error::Config("max depth must be in 1..=20".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_delta_specs() {
        assert_eq!("0.5D".parse::<DeltaSpec>().unwrap(), DeltaSpec::Fraction(0.5));
        assert_eq!("0.25*D".parse::<DeltaSpec>().unwrap(), DeltaSpec::Fraction(0.25));
        assert_eq!("1.5".parse::<DeltaSpec>().unwrap(), DeltaSpec::Absolute(1.5));
        assert!("x".parse::<DeltaSpec>().is_err());
    }

    #[test]
    fn reads_toml() {
        let cfg = RunConfig::from_toml_str(
            r#"
            deltas = ["0.5D", 1.0]
            max_depth = 6
            [generator]
            kind = "random-images"
            seed = 7
            points = 20
            "#,
        )
        .unwrap();
        assert_eq!(cfg.deltas, vec![DeltaSpec::Fraction(0.5), DeltaSpec::Absolute(1.0)]);
        assert_eq!(cfg.generator.as_ref().unwrap().kind, MapKind::RandomImages);
        assert_eq!(cfg.max_depth, 6);
        cfg.validate().unwrap();
        assert!(RunConfig::default().validate().is_err());
        assert!(RunConfig::from_toml_str("bogus = 1").is_err());
    }
}
