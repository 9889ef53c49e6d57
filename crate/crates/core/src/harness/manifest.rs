//! Run manifests: enough to rerun a command and get identical tables.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::ExperimentConfig;
use crate::error::Result;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub crate_version: String,
    /// SHA-256 of the canonical JSON form of the config.
    pub config_hash: String,
    pub seed: u64,
    pub threads: usize,
    pub config: ExperimentConfig,
}

/// Hash of the config contents, insensitive to TOML formatting.
pub fn config_hash(cfg: &ExperimentConfig) -> Result<String> {
    let canonical = serde_json::to_vec(cfg)?;
    let digest = Sha256::digest(&canonical);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

impl RunManifest {
    pub fn new(command: &str, cfg: &ExperimentConfig) -> Result<Self> {
        Ok(Self {
            command: command.into(),
            crate_version: env!("CARGO_PKG_VERSION").into(),
            config_hash: config_hash(cfg)?,
            seed: cfg.seed,
            threads: rayon::current_num_threads(),
            config: cfg.clone(),
        })
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::write(dir.join(MANIFEST_FILE), serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn read(dir: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(dir.join(MANIFEST_FILE))?)?)
    }
}
