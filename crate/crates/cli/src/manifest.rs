use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Everything needed to repeat a run: inputs by path and content digest,
/// every flag, and the digest of each file written.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub tool_version: String,
    pub configs: Vec<String>,
    /// SHA-256 over the config documents, each prefixed by its byte length.
    pub config_digest: String,
    pub seed: Option<u64>,
    pub out: String,
    pub args: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(subcommand: &str, configs: &[(&Path, &[u8])], out: &Path) -> Self {
        let mut hasher = Sha256::new();
        for (_, bytes) in configs {
            hasher.update((bytes.len() as u64).to_le_bytes());
            hasher.update(bytes);
        }
        Self {
            subcommand: subcommand.into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            configs: configs.iter().map(|(p, _)| p.display().to_string()).collect(),
            config_digest: hex::encode(hasher.finalize()),
            seed: None,
            out: out.display().to_string(),
            args: BTreeMap::new(),
            outputs: BTreeMap::new(),
        }
    }

    pub fn arg(&mut self, name: &str, value: impl ToString) -> &mut Self {
        self.args.insert(name.into(), value.to_string());
        self
    }
}

/// Output directory that records each file it writes into its manifest.
pub struct OutDir {
    dir: PathBuf,
    pub manifest: RunManifest,
}

impl OutDir {
    pub fn create(dir: &Path, manifest: RunManifest) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self { dir: dir.to_path_buf(), manifest })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.manifest.outputs.insert(name.into(), sha256_hex(bytes));
        Ok(path)
    }

    pub fn finish(self) -> Result<(), CliError> {
        let path = self.dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        std::fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))
    }
}
