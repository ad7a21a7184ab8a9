use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "manifest.json";

/// How an output directory was produced.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub params: serde_json::Value,
    /// Input path to hex SHA-256 of its contents.
    pub inputs: BTreeMap<String, String>,
    pub tool_version: String,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(command: &str, params: serde_json::Value, inputs: &[&Path]) -> Result<Self> {
        let mut digests = BTreeMap::new();
        for path in inputs {
            digests.insert(path.display().to_string(), sha256_file(path)?);
        }
        Ok(RunManifest {
            command: command.to_owned(),
            params,
            inputs: digests,
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            timestamp: chrono::Utc::now().to_rfc3339(),
        })
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(MANIFEST_FILE);
        let mut json = serde_json::to_string_pretty(self)?;
        json.push('\n');
        fs::write(&path, json).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}
