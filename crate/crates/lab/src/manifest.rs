//! The run manifest: what produced a run's artifacts and their hashes.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{read_to_string, write, LabError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub tool_version: String,
    /// Seconds since the Unix epoch; the only field that varies between
    /// identical runs.
    pub created_unix: u64,
    pub seed: u64,
    pub strategy: String,
    pub env_steps: u64,
    pub iterations: u64,
    /// The fully resolved configuration, as TOML.
    pub config: String,
    /// SHA-256 (hex) of every artifact, by file name.
    pub artifacts: BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl RunManifest {
    pub fn save(&self, path: &Path) -> Result<()> {
        write(
            path,
            serde_json::to_string_pretty(self).expect("manifest serializes") + "\n",
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        serde_json::from_str(&read_to_string(path)?).map_err(|e| LabError::parse(path, e.to_string()))
    }

    /// Re-hashes every listed artifact found next to the manifest.
    pub fn verify(&self, dir: &Path) -> Result<()> {
        for (name, expected) in &self.artifacts {
            let path = dir.join(name);
            let bytes = std::fs::read(&path).map_err(|e| LabError::io(&path, e))?;
            let got = sha256_hex(&bytes);
            if &got != expected {
                return Err(LabError::Integrity(format!(
                    "{name}: hash {got} does not match manifest {expected}"
                )));
            }
        }
        Ok(())
    }
}
