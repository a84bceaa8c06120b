//! Output locations and the provenance envelope around result documents.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;

pub const VERSION: &str = concat!(
    "vortexlab ",
    env!("CARGO_PKG_VERSION"),
    " (",
    env!("VORTEXLAB_GIT_DESCRIBE"),
    ")"
);

/// Where a command writes. `--out result.json` names the result document
/// directly and places companion files next to it; any other path is taken
/// as a directory and files are named after `default_stem`.
#[derive(Clone, Debug)]
pub struct OutputPlan {
    pub dir: PathBuf,
    pub stem: String,
}

impl OutputPlan {
    pub fn new(out: &Path, default_stem: &str) -> Self {
        if out.extension().is_some_and(|e| e == "json") {
            let dir = out.parent().map(Path::to_path_buf).unwrap_or_default();
            let stem = out
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| default_stem.to_string());
            OutputPlan { dir, stem }
        } else {
            OutputPlan {
                dir: out.to_path_buf(),
                stem: default_stem.to_string(),
            }
        }
    }

    /// `<dir>/<stem><suffix>`.
    pub fn path(&self, suffix: &str) -> PathBuf {
        self.dir.join(format!("{}{}", self.stem, suffix))
    }

    /// Creates the directory and opens `<stem><suffix>` for writing.
    pub fn create(&self, suffix: &str) -> Result<BufWriter<File>> {
        if !self.dir.as_os_str().is_empty() {
            fs::create_dir_all(&self.dir).with_context(|| format!("cannot create {}", self.dir.display()))?;
        }
        let path = self.path(suffix);
        let file = File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
        Ok(BufWriter::new(file))
    }

    pub fn write_json<T: Serialize>(&self, suffix: &str, value: &T) -> Result<PathBuf> {
        let mut w = self.create(suffix)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(self.path(suffix))
    }
}

/// Provenance wrapper for every result document. Only `generated_at_unix`
/// changes between identical runs.
#[derive(Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub command: &'a str,
    pub version: &'a str,
    pub config_sha256: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub generated_at_unix: u64,
    pub result: T,
}

impl<'a, T: Serialize> Envelope<'a, T> {
    pub fn new(command: &'a str, config_sha256: &'a str, seed: Option<u64>, result: T) -> Self {
        Envelope {
            command,
            version: VERSION,
            config_sha256,
            seed,
            generated_at_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            result,
        }
    }
}
