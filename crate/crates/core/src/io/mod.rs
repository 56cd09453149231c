//! Persistence: binary containers for genomes, models and checkpoints, CSV
//! tables, JSON documents, run configuration and SVG scatter plots.
//!
//! Every writer goes through [`write_atomic`], so a crash never leaves a
//! half-written file under the final name.

mod config;
mod container;
mod svg;
mod tables;

pub use config::{RunConfig, SCHEMA_VERSION};
pub use container::{
    load_checkpoint, load_genome, load_model, save_checkpoint, save_genome, save_model, Checkpoint, FORMAT_VERSION,
    MAGIC_CHECKPOINT, MAGIC_GENOME, MAGIC_MODEL,
};
pub use svg::{emit_scatter, render_scatter};
pub use tables::{
    read_points_csv, read_stats_csv, write_correlation_csv, write_gene_scores_csv, write_points_csv,
    write_realness_csv, write_samples_csv, write_stats_csv, write_train_log_csv,
};

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::Result;

fn temp_path(path: &Path) -> PathBuf {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!(".{name}.tmp"))
}

/// Writes `bytes` to a sibling temp file, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let tmp = temp_path(path);
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_slice(&fs::read(path)?)?)
}

#[cfg(test)]
mod tests;
