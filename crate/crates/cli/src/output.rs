//! Run manifests and artifact writers.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;

use crate::Format;

#[derive(Debug, Clone, Serialize)]
pub struct Versions {
    pub gcdstat: &'static str,
    pub cli: &'static str,
}

/// Everything needed to reproduce an artifact.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub subcommand: &'static str,
    pub parameters: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub versions: Versions,
    pub elapsed_seconds: f64,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(subcommand: &'static str, parameters: impl Serialize, seed: Option<u64>) -> Result<Self> {
        Ok(Self {
            subcommand,
            parameters: serde_json::to_value(parameters)?,
            seed,
            versions: Versions {
                gcdstat: gcdstat::VERSION,
                cli: env!("CARGO_PKG_VERSION"),
            },
            elapsed_seconds: 0.0,
            outputs: Vec::new(),
        })
    }

    pub fn finish(&mut self, started: Instant) {
        self.elapsed_seconds = started.elapsed().as_secs_f64();
    }
}

#[derive(Serialize)]
struct Artifact<'a, T: Serialize> {
    manifest: &'a RunManifest,
    result: &'a T,
}

/// Path of the JSON manifest that accompanies a CSV data file.
pub fn sidecar(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    path.with_file_name(name)
}

fn csv_bytes<R: Serialize>(rows: &[R]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))
}

fn json_bytes<T: Serialize>(manifest: &RunManifest, result: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(&Artifact { manifest, result })?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn write_to(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

/// Emits `result` as JSON (with the manifest inline) or as CSV rows (with
/// the manifest in a sidecar file; on stdout the manifest goes to stderr).
pub fn emit<T: Serialize, R: Serialize>(
    mut manifest: RunManifest,
    started: Instant,
    format: Format,
    out: Option<&Path>,
    result: &T,
    rows: &[R],
) -> Result<()> {
    match (format, out) {
        (Format::Json, Some(path)) => {
            manifest.outputs = vec![path.display().to_string()];
            manifest.finish(started);
            write_to(path, &json_bytes(&manifest, result)?)
        }
        (Format::Json, None) => {
            manifest.finish(started);
            std::io::stdout().write_all(&json_bytes(&manifest, result)?)?;
            Ok(())
        }
        (Format::Csv, Some(path)) => {
            let side = sidecar(path);
            manifest.outputs = vec![path.display().to_string(), side.display().to_string()];
            write_to(path, &csv_bytes(rows)?)?;
            manifest.finish(started);
            write_to(&side, &json_bytes(&manifest, result)?)
        }
        (Format::Csv, None) => {
            std::io::stdout().write_all(&csv_bytes(rows)?)?;
            manifest.finish(started);
            eprintln!("{}", serde_json::to_string(&manifest)?);
            Ok(())
        }
    }
}
