//! Output helpers: provenance header shared by every summary, CSV writers.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::RunConfig;

/// Fields embedded in every JSON summary.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub schema_version: u32,
    pub tool_version: &'static str,
    pub config_hash: String,
    pub seed: Option<u64>,
}

impl Provenance {
    pub fn new(cfg: &RunConfig, seed: Option<u64>) -> Self {
        Self {
            schema_version: crate::config::SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION"),
            config_hash: cfg.hash(),
            seed,
        }
    }
}

pub struct OutDir {
    dir: PathBuf,
}

impl OutDir {
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf> {
        let path = self.path(name);
        let text = serde_json::to_string_pretty(value).context("serializing summary")?;
        std::fs::write(&path, text + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    pub fn csv_writer(&self, name: &str) -> Result<csv::Writer<std::fs::File>> {
        let path = self.path(name);
        csv::Writer::from_path(&path).with_context(|| format!("creating {}", path.display()))
    }
}

/// Format a float the same way in every CSV (shortest form that
/// round-trips; negative zero normalized).
pub fn fmt(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else {
        format!("{x}")
    }
}
