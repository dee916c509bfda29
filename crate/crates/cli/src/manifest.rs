//! Self-describing run directories.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const CONFIG_FILE: &str = "config.txt";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub file: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RngAccounting {
    pub generator: String,
    pub normals_per_step: usize,
    /// Standard normals consumed across all replicas.
    pub normals_drawn: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment: String,
    pub version: String,
    /// Fully resolved configuration, in config-file syntax.
    pub config: String,
    pub parameters: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub replicas: Option<usize>,
    pub workers: usize,
    pub outputs: Vec<OutputFile>,
    pub wall_clock_seconds: f64,
    pub rng: RngAccounting,
    pub blowups: usize,
    pub complete: bool,
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self)?;
        fs::write(&path, text + "\n").map_err(CliError::io(&path))
    }

    pub fn read(dir: &Path) -> Result<RunManifest, CliError> {
        let path = dir.join(MANIFEST_FILE);
        if !path.exists() {
            return Err(CliError::Incomplete(format!("{} has no {MANIFEST_FILE}", dir.display())));
        }
        let text = fs::read_to_string(&path).map_err(CliError::io(&path))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Checks that the run finished and every recorded output is present and unchanged.
    pub fn verify(&self, dir: &Path) -> Result<(), CliError> {
        if !self.complete {
            return Err(CliError::Incomplete(format!("{} did not finish", dir.display())));
        }
        for out in &self.outputs {
            let path = dir.join(&out.file);
            if !path.exists() {
                return Err(CliError::Incomplete(format!("missing output {}", out.file)));
            }
            if file_digest(&path)? != out.sha256 {
                return Err(CliError::Incomplete(format!("output {} was modified", out.file)));
            }
        }
        Ok(())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_digest(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path).map_err(CliError::io(path))?;
    Ok(sha256_hex(&bytes))
}
