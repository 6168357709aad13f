//! Run manifests.
//!
//! Every command that writes output files also writes a `manifest.json`
//! into the same directory. The manifest records the command line, a
//! digest of the effective configuration, the seeds, digests of the input
//! files, and the digests of every produced file, so any output can be
//! traced back to the run that made it.
//!
//! The run id is a digest over everything except the timestamp and output
//! digests; two runs with identical inputs, flags, and seeds share an id.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    /// Deterministic run identifier.
    pub run_id: String,
    /// The invoked subcommand and its flags.
    pub command: String,
    /// Digest of the effective configuration (after defaults).
    pub config_digest: String,
    /// Seeds in effect for the run.
    pub seeds: Vec<u64>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub toolkit_version: String,
    /// RFC 3339 wall-clock time; informational only, excluded from run_id.
    pub timestamp: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn digest_file(path: &Path) -> std::io::Result<FileDigest> {
    let bytes = std::fs::read(path)?;
    Ok(FileDigest { path: path.display().to_string(), sha256: sha256_hex(&bytes) })
}

impl RunManifest {
    pub fn new(command: String, config_text: &str, seeds: Vec<u64>, inputs: Vec<FileDigest>) -> Self {
        let config_digest = sha256_hex(config_text.as_bytes());
        let mut id_material = String::new();
        id_material.push_str(&command);
        id_material.push('\n');
        id_material.push_str(&config_digest);
        for s in &seeds {
            id_material.push_str(&format!("\n{s}"));
        }
        for input in &inputs {
            id_material.push('\n');
            id_material.push_str(&input.sha256);
        }
        id_material.push('\n');
        id_material.push_str(env!("CARGO_PKG_VERSION"));
        RunManifest {
            run_id: sha256_hex(id_material.as_bytes()),
            command,
            config_digest,
            seeds,
            inputs,
            outputs: Vec::new(),
            toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339(),
        }
    }

    /// Records an output file's digest.
    pub fn add_output(&mut self, path: &Path) -> std::io::Result<()> {
        self.outputs.push(digest_file(path)?);
        Ok(())
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self).expect("manifest serializes"))
    }

    pub fn load(path: &Path) -> std::io::Result<RunManifest> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }
}
