//! `manifest.json`: config hash, seed, versions and a checksum per output.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{OutputConfig, Scenario, ScenarioConfig};

pub const MANIFEST: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub scenario: String,
    pub seed: u64,
    pub config_sha256: String,
    pub versions: BTreeMap<String, String>,
    pub outputs: Vec<OutputEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Hash of the effective config. The output directory is excluded so that
/// reruns into different directories compare equal.
pub fn config_hash(config: &ScenarioConfig, scenario: Scenario, seed: u64) -> String {
    let mut c = config.clone();
    c.output = OutputConfig::default();
    c.scenario = Some(scenario);
    c.seed = seed;
    sha256_hex(&serde_json::to_vec(&c).expect("config serializes"))
}

pub fn versions() -> BTreeMap<String, String> {
    BTreeMap::from([
        ("oneworld".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("snapshot_format".to_string(), "OWF1".to_string()),
    ])
}

impl Manifest {
    /// Checksums `files` (relative to `dir`), sorted by name.
    pub fn build(
        dir: &Path,
        files: &[String],
        config: &ScenarioConfig,
        scenario: Scenario,
        seed: u64,
    ) -> std::io::Result<Self> {
        let mut names = files.to_vec();
        names.sort();
        names.dedup();
        let outputs = names
            .into_iter()
            .map(|path| {
                let bytes = fs::read(dir.join(&path))?;
                Ok(OutputEntry { bytes: bytes.len() as u64, sha256: sha256_hex(&bytes), path })
            })
            .collect::<std::io::Result<_>>()?;
        Ok(Self {
            scenario: scenario.as_str().to_string(),
            seed,
            config_sha256: config_hash(config, scenario, seed),
            versions: versions(),
            outputs,
        })
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        fs::write(dir.join(MANIFEST), text)
    }

    pub fn read(dir: &Path) -> std::io::Result<Self> {
        let text = fs::read_to_string(dir.join(MANIFEST))?;
        serde_json::from_str(&text).map_err(std::io::Error::other)
    }
}
