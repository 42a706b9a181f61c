//! Per-run manifest: everything needed to reproduce a command's outputs.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::io::{atomic_write, config_hash, sha256_hex};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Hash over the command, its parameters, the effective configuration
    /// and the input digests.
    pub config_hash: String,
    pub seed: u64,
    pub parameters: serde_json::Value,
    pub config: serde_json::Value,
    pub arguments: Vec<String>,
    #[serde(skip)]
    pub inputs: Vec<PathBuf>,
    #[serde(rename = "inputs")]
    pub input_digests: Vec<InputDigest>,
    pub outputs: Vec<PathBuf>,
    pub started_at: String,
    pub engine_version: String,
}

impl RunManifest {
    pub fn new(
        command: &str,
        cfg: &RunConfig,
        parameters: serde_json::Value,
        seed: u64,
        inputs: Vec<PathBuf>,
        outputs: Vec<PathBuf>,
        arguments: Vec<String>,
    ) -> io::Result<Self> {
        let mut input_digests = Vec::with_capacity(inputs.len());
        for p in &inputs {
            let bytes = fs::read(p).map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", p.display())))?;
            input_digests.push(InputDigest { path: p.clone(), sha256: sha256_hex(&bytes) });
        }
        let config = serde_json::to_value(cfg).expect("config serialises");
        let digests: Vec<&str> = input_digests.iter().map(|d| d.sha256.as_str()).collect();
        let hash = config_hash(&serde_json::json!({
            "command": command,
            "parameters": parameters,
            "config": config,
            "inputs": digests,
        }));
        Ok(RunManifest {
            command: command.to_string(),
            config_hash: hash,
            seed,
            parameters,
            config,
            arguments,
            inputs,
            input_digests,
            outputs,
            started_at: chrono::Utc::now().to_rfc3339(),
            engine_version: env!("CARGO_PKG_VERSION").to_string(),
        })
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        let mut text = serde_json::to_string_pretty(self).map_err(io::Error::other)?;
        text.push('\n');
        atomic_write(path, text.as_bytes())
    }
}
