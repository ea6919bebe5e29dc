//! Self-describing file emission: every JSON document and CSV carries the
//! tool version and the config hash it was produced from.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use ksphere_core::error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub struct OutputDir {
    dir: PathBuf,
    config_sha256: String,
}

impl OutputDir {
    pub fn create(dir: &Path, config_sha256: &str) -> Result<Self> {
        fs::create_dir_all(dir)
            .map_err(|e| Error::InvalidInput(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            config_sha256: config_sha256.to_string(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Writes a JSON document wrapped with version and config hash.
    pub fn write_json(&self, name: &str, payload: Value) -> Result<PathBuf> {
        let doc = json!({
            "version": VERSION,
            "config_sha256": self.config_sha256,
            "payload": payload,
        });
        let path = self.path(name);
        let text = serde_json::to_string_pretty(&doc)
            .map_err(|e| Error::Numerical(format!("serialization failed: {e}")))?;
        fs::write(&path, text + "\n")
            .map_err(|e| Error::Numerical(format!("cannot write {}: {e}", path.display())))?;
        Ok(path)
    }

    /// Opens a CSV writer after emitting the self-description comment lines.
    pub fn csv_writer(&self, name: &str) -> Result<impl Write> {
        let path = self.path(name);
        let mut file = fs::File::create(&path)
            .map_err(|e| Error::Numerical(format!("cannot write {}: {e}", path.display())))?;
        writeln!(file, "# version={}", VERSION)
            .and_then(|_| writeln!(file, "# config_sha256={}", self.config_sha256))
            .map_err(|e| Error::Numerical(format!("cannot write {}: {e}", path.display())))?;
        Ok(file)
    }
}
