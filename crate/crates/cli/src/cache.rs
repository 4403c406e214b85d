//! On-disk cache of SNAP + displacement optimizations.

use std::path::{Path, PathBuf};

use hybrid_lchs::linalg::C64;
use hybrid_lchs::stateprep::{SnapDOptions, SnapDParams};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Serialize)]
struct Key<'a> {
    target: &'a [C64],
    layers: usize,
    seed: u64,
    budget: u64,
    options: &'a SnapDOptions,
}

/// Hex SHA-256 of the target and every setting that influences the result.
pub fn snapd_key(target: &[C64], layers: usize, seed: u64, budget: u64, options: &SnapDOptions) -> String {
    let key = Key {
        target,
        layers,
        seed,
        budget,
        options,
    };
    let bytes = serde_json::to_vec(&key).expect("cache key serializes");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Directory-backed store of optimized parameters.
#[derive(Debug, Clone)]
pub struct SnapdCache {
    dir: PathBuf,
}

impl SnapdCache {
    pub fn new(dir: impl AsRef<Path>) -> Self {
        Self {
            dir: dir.as_ref().to_path_buf(),
        }
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("snapd-{key}.json"))
    }

    /// Cached parameters, if present and readable.
    pub fn get(&self, key: &str) -> Option<SnapDParams> {
        let text = std::fs::read_to_string(self.path(key)).ok()?;
        serde_json::from_str(&text).ok()
    }

    pub fn put(&self, key: &str, params: &SnapDParams) -> Result<(), CliError> {
        std::fs::create_dir_all(&self.dir).map_err(CliError::io(&self.dir))?;
        let path = self.path(key);
        let text = serde_json::to_string_pretty(params).expect("parameters serialize");
        std::fs::write(&path, text).map_err(CliError::io(path))
    }
}
