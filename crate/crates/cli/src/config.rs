use crate::CliError;
use crownlab_core::GridOpts;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

/// Run configuration, read from a TOML file. Every section and key is optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub pair: PairSection,
    pub grid: GridOpts,
    pub polygon: PolygonSection,
    pub mc: McSection,
    pub norms: NormsSection,
    pub landscape: LandscapeSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PairSection {
    pub n: usize,
    pub p: f64,
}

impl Default for PairSection {
    fn default() -> Self {
        Self { n: 6, p: 2.0 }
    }
}

/// A single `k` or an increasing list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KList {
    One(usize),
    Many(Vec<usize>),
}

impl KList {
    pub fn to_vec(&self) -> Vec<usize> {
        match self {
            KList::One(k) => vec![*k],
            KList::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolygonSection {
    pub k: KList,
    pub mu0: f64,
    pub r: f64,
    pub lambda: f64,
}

impl Default for PolygonSection {
    fn default() -> Self {
        Self { k: KList::Many(vec![8, 16, 32]), mu0: 1.0, r: 1.0, lambda: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McSection {
    /// Samples per Monte Carlo estimate.
    pub samples: u64,
    pub seed: u64,
    /// Worker threads; 0 uses every available core.
    pub threads: usize,
}

impl Default for McSection {
    fn default() -> Self {
        Self { samples: 1_000_000, seed: 1, threads: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormsSection {
    /// Random plan points per scale.
    pub per_scale: usize,
}

impl Default for NormsSection {
    fn default() -> Self {
        Self { per_scale: 400 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LandscapeSection {
    pub resolution: usize,
    pub m_lo: f64,
    pub m_hi: f64,
    pub l_lo: f64,
    pub l_hi: f64,
}

impl Default for LandscapeSection {
    fn default() -> Self {
        Self { resolution: 64, m_lo: 0.125, m_hi: 8.0, l_lo: 0.125, l_hi: 8.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical TOML form.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn k_list(&self) -> Vec<usize> {
        self.polygon.k.to_vec()
    }
}
