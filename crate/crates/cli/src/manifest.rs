//! Run manifests: every subcommand writes a JSON sidecar capturing input
//! digests, the fully resolved parameter set, the seed and the tool
//! version: enough to reproduce the primary outputs bit-exactly.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use sha2::{Digest, Sha256};

use crate::errors::{CliError, CliResult};

#[derive(Debug, serde::Serialize)]
struct InputRecord {
    path: String,
    sha256: String,
}

#[derive(Debug, serde::Serialize)]
pub struct RunManifest {
    tool: &'static str,
    version: &'static str,
    subcommand: String,
    inputs: BTreeMap<String, InputRecord>,
    params: BTreeMap<String, String>,
    seed: Option<u64>,
    outputs: Vec<String>,
    duration_ms: u128,
}

pub struct ManifestBuilder {
    subcommand: String,
    inputs: BTreeMap<String, InputRecord>,
    params: BTreeMap<String, String>,
    seed: Option<u64>,
    outputs: Vec<String>,
    started: Instant,
}

impl ManifestBuilder {
    pub fn new(subcommand: &str) -> ManifestBuilder {
        ManifestBuilder {
            subcommand: subcommand.to_string(),
            inputs: BTreeMap::new(),
            params: BTreeMap::new(),
            seed: None,
            outputs: Vec::new(),
            started: Instant::now(),
        }
    }

    pub fn input(&mut self, name: &str, path: &Path) -> CliResult<()> {
        let bytes = std::fs::read(path)
            .map_err(|e| CliError::Runtime(format!("reading {}: {e}", path.display())))?;
        let digest = Sha256::digest(&bytes);
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.inputs.insert(
            name.to_string(),
            InputRecord {
                path: path.display().to_string(),
                sha256: hex,
            },
        );
        Ok(())
    }

    pub fn param(&mut self, key: &str, value: impl ToString) {
        self.params.insert(key.to_string(), value.to_string());
    }

    pub fn seed(&mut self, seed: u64) {
        self.seed = Some(seed);
        self.param("seed", seed);
    }

    /// Record and write a primary output.
    pub fn write_output(&mut self, path: &Path, contents: &str) -> CliResult<()> {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)?;
            }
        }
        std::fs::write(path, contents)
            .map_err(|e| CliError::Runtime(format!("writing {}: {e}", path.display())))?;
        self.outputs.push(path.display().to_string());
        Ok(())
    }

    /// Write the manifest next to the first primary output
    /// (`<output>.manifest.json`).
    pub fn finish(self) -> CliResult<()> {
        let manifest_path = match self.outputs.first() {
            Some(first) => PathBuf::from(format!("{first}.manifest.json")),
            None => return Ok(()),
        };
        let manifest = RunManifest {
            tool: "roomloc",
            version: env!("CARGO_PKG_VERSION"),
            subcommand: self.subcommand,
            inputs: self.inputs,
            params: self.params,
            seed: self.seed,
            outputs: self.outputs,
            duration_ms: self.started.elapsed().as_millis(),
        };
        let json = serde_json::to_string_pretty(&manifest)
            .map_err(|e| CliError::Runtime(format!("manifest: {e}")))?;
        std::fs::write(&manifest_path, json + "\n")
            .map_err(|e| CliError::Runtime(format!("writing {}: {e}", manifest_path.display())))?;
        Ok(())
    }
}
