//! Run manifests written next to every output file.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub params: BTreeMap<String, String>,
    pub seed: Option<u64>,
    /// Input role → SHA-256 of the file contents.
    pub inputs: BTreeMap<String, String>,
    pub version: String,
}

impl RunManifest {
    pub fn new(subcommand: &str, seed: Option<u64>) -> RunManifest {
        RunManifest {
            subcommand: subcommand.to_owned(),
            params: BTreeMap::new(),
            seed,
            inputs: BTreeMap::new(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.params.insert(key.to_owned(), value.to_string());
        self
    }

    pub fn input(&mut self, role: &str, contents: &str) -> &mut Self {
        self.inputs.insert(
            role.to_owned(),
            hex::encode(Sha256::digest(contents.as_bytes())),
        );
        self
    }

    /// Flat view for report headers.
    pub fn flatten(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("subcommand".to_owned(), self.subcommand.clone());
        for (k, v) in &self.params {
            m.insert(k.clone(), v.clone());
        }
        if let Some(s) = self.seed {
            m.insert("seed".to_owned(), s.to_string());
        }
        for (k, v) in &self.inputs {
            m.insert(format!("input.{k}.sha256"), v.clone());
        }
        m.insert("version".to_owned(), self.version.clone());
        m
    }
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// Writes `contents` to `path` and the manifest beside it.
pub fn write_output(path: &Path, contents: &str, manifest: &RunManifest) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))?;
    let m = manifest_path(path);
    let json = serde_json::to_string_pretty(manifest)? + "\n";
    fs::write(&m, json).with_context(|| format!("cannot write {}", m.display()))?;
    Ok(())
}
