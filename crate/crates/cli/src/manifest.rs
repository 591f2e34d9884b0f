use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Audit record written next to the outputs of every run. Timestamps live
/// only here so the outputs themselves stay byte-reproducible.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    pub config_sha256: String,
    pub seed: u64,
    pub threads: usize,
    pub started_at: String,
    pub finished_at: String,
    pub outputs: Vec<OutputRecord>,
}

#[derive(Debug, Serialize)]
pub struct OutputRecord {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl OutputRecord {
    pub fn of(dir: &Path, name: &Path) -> CliResult<Self> {
        let bytes = std::fs::read(dir.join(name))
            .map_err(|e| CliError::data(format!("cannot read back {}: {e}", name.display())))?;
        Ok(Self { path: name.to_string_lossy().into_owned(), bytes: bytes.len() as u64, sha256: sha256_hex(&bytes) })
    }
}

pub fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}
