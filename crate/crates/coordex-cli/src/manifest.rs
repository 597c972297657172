//! Run manifest: a sidecar file recording what produced a report.
//! Timestamps live only here, so the report itself stays byte-stable
//! across reruns.

use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::canon::canonical_string;
use crate::CliError;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config_hash: String,
    pub started: String,
    pub finished: String,
    pub seed: u64,
}

pub fn timestamp() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

pub fn manifest_path(output_path: &Path) -> PathBuf {
    PathBuf::from(format!("{}.manifest.json", output_path.display()))
}

pub fn write_manifest(output_path: &Path, manifest: &RunManifest) -> Result<PathBuf, CliError> {
    let path = manifest_path(output_path);
    let body = canonical_string(manifest)?;
    std::fs::write(&path, body).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}
