//! Single writer for run artifacts, and the manifest that lists them.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliResult;

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: String,
    pub subcommand: String,
    pub config: serde_json::Value,
    pub versions: serde_json::Value,
    pub seed: u64,
    pub threads: usize,
    pub budget_secs: Option<f64>,
    pub wall_time_secs: f64,
    pub exit_code: i32,
    pub message: Option<String>,
    pub files: Vec<FileEntry>,
}

/// Writes files into the output directory in call order and records
/// their hashes.
pub struct Artifacts {
    dir: PathBuf,
    files: Vec<FileEntry>,
}

impl Artifacts {
    pub fn new(dir: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Artifacts {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        std::fs::write(self.dir.join(name), bytes)?;
        let digest = Sha256::digest(bytes);
        let sha256 = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.files.retain(|f| f.path != name);
        self.files.push(FileEntry {
            path: name.to_string(),
            sha256,
            bytes: bytes.len(),
        });
        log::info!("wrote {}", self.dir.join(name).display());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn files(&self) -> &[FileEntry] {
        &self.files
    }

    pub fn finish(self, mut manifest: Manifest) -> CliResult<()> {
        manifest.files = self.files;
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        std::fs::write(self.dir.join(MANIFEST), text)?;
        Ok(())
    }
}
