use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    /// Relative to the output directory.
    pub path: String,
    pub sha256: String,
}

/// Written as `manifest.json` next to every output set. Holds no timestamps
/// or absolute paths, so equal inputs give an identical file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub artifacts: Vec<Artifact>,
    pub tool_version: String,
}

impl RunManifest {
    pub fn new(command: impl Into<String>, config_hash: String, seed: Option<u64>) -> Self {
        Self {
            command: command.into(),
            config_hash,
            seed,
            artifacts: Vec::new(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    /// Records files under `dir`, in the given order.
    pub fn add_files(&mut self, dir: &Path, files: &[PathBuf]) -> Result<(), CliError> {
        for f in files {
            let bytes = fs::read(f).map_err(|e| CliError::io(f.clone(), e))?;
            let rel = f.strip_prefix(dir).unwrap_or(f);
            self.artifacts.push(Artifact {
                path: rel.to_string_lossy().replace('\\', "/"),
                sha256: hex::encode(Sha256::digest(&bytes)),
            });
        }
        Ok(())
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf, CliError> {
        let path = dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(self).map_err(aerprov::Error::from)?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| CliError::io(path.clone(), e))?;
        Ok(path)
    }
}
