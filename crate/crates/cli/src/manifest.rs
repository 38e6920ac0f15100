use serde::Serialize;
use sha2::{Digest, Sha256};

/// Provenance record written next to every set of outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    /// sha256 of `resolved_config.toml`
    pub config_digest: String,
    pub root_seed: u64,
    pub tool_version: String,
    pub started: String,
    pub finished: String,
    pub outputs: Vec<String>,
}

pub fn digest(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}
