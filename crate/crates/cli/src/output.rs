//! Output directory with atomic, hash-stamped files.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::Value;
use tempfile::NamedTempFile;

use crate::error::CliError;

pub struct OutputDir {
    dir: PathBuf,
    hash: String,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(dir: &Path, hash: &str) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.display().to_string(),
            source,
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            hash: hash.to_string(),
            written: Vec::new(),
        })
    }

    /// File names written so far, in order.
    pub fn written(&self) -> &[String] {
        &self.written
    }

    /// CSV preceded by a `# config_sha256=<hex>` comment line.
    pub fn csv(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        let text = format!("# config_sha256={}\n{body}", self.hash);
        self.write(name, text.as_bytes())
    }

    /// Pretty JSON object with a `config_sha256` member added.
    pub fn json(&mut self, name: &str, mut value: Value) -> Result<(), CliError> {
        if let Value::Object(map) = &mut value {
            map.insert("config_sha256".into(), Value::String(self.hash.clone()));
        }
        let mut text = serde_json::to_string_pretty(&value).expect("JSON value serializes");
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// Writes to a temporary file in the same directory, then renames it
    /// over `name`, so readers never observe a partial file.
    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let target = self.dir.join(name);
        let io_err = |source| CliError::Io {
            path: target.display().to_string(),
            source,
        };
        let mut tmp = NamedTempFile::new_in(&self.dir).map_err(io_err)?;
        tmp.write_all(bytes).map_err(io_err)?;
        tmp.as_file().sync_all().map_err(io_err)?;
        tmp.persist(&target).map_err(|e| io_err(e.error))?;
        log::info!("wrote {}", target.display());
        self.written.push(name.to_string());
        Ok(())
    }
}
