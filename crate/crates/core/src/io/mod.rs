//! On-disk formats shared with the feature exporter: the binary feature
//! file, the JSON manifest and JSON model snapshots. Every write goes through
//! a temporary file in the destination directory followed by a rename.

mod dataset;
mod features;
mod manifest;
mod snapshot;

pub use dataset::Dataset;
pub use features::{
    decode_features, encode_features, read_features, write_features, FeatureMatrix, DTYPE_F32,
    FEATURE_MAGIC, FEATURE_VERSION, HEADER_LEN,
};
pub use manifest::{read_manifest, write_manifest, Manifest, SampleRecord, Split};
pub use snapshot::{load_model, model_from_json, model_to_json, save_model, SNAPSHOT_FORMAT, SNAPSHOT_VERSION};

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Writes `bytes` to `path` so that readers see either the old file or the
/// complete new one.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}
