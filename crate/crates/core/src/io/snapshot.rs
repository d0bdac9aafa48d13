use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::FusionMatrix;
use crate::model::{Exll, ExllConfig};
use crate::precision::PrecisionMatrix;
use crate::stats::{ClassState, GlobalStats};

pub const SNAPSHOT_FORMAT: &str = "exll-model";
pub const SNAPSHOT_VERSION: u64 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelSnapshot {
    format: String,
    version: u64,
    config: ExllConfig,
    global: Option<GlobalStats>,
    classes: Vec<ClassState>,
    fusion: FusionMatrix,
    /// Cached training-time precision. Stored so that a resumed stream
    /// refreshes at the same sample counts as an uninterrupted one.
    precision: Option<PrecisionMatrix>,
}

#[derive(Deserialize)]
struct Header {
    format: String,
    version: u64,
}

pub fn model_to_json(model: &Exll) -> Result<String> {
    let snap = ModelSnapshot {
        format: SNAPSHOT_FORMAT.to_string(),
        version: SNAPSHOT_VERSION,
        config: model.config.clone(),
        global: model.global.clone(),
        classes: model.classes.values().cloned().collect(),
        fusion: model.fusion.clone(),
        precision: model.precision.clone(),
    };
    let mut text = serde_json::to_string(&snap).map_err(|e| Error::json("model snapshot", e))?;
    text.push('\n');
    Ok(text)
}

/// Parses a snapshot and checks the structural invariants of every class.
pub fn model_from_json(text: &str, path: &Path) -> Result<Exll> {
    let ctx = || path.display().to_string();
    let header: Header = serde_json::from_str(text).map_err(|e| Error::json(ctx(), e))?;
    if header.format != SNAPSHOT_FORMAT {
        return Err(Error::BadMagic { path: path.into(), found: header.format.into_bytes() });
    }
    if header.version != SNAPSHOT_VERSION {
        return Err(Error::VersionUnsupported { path: path.into(), what: "snapshot version", found: header.version, offset: 0 });
    }
    let snap: ModelSnapshot = serde_json::from_str(text).map_err(|e| Error::json(ctx(), e))?;
    let mut classes = std::collections::BTreeMap::new();
    for c in snap.classes {
        let id = c.class_id();
        if classes.insert(id, c).is_some() {
            return Err(Error::Invariant(format!("class {id} appears twice in the snapshot")));
        }
    }
    let model = Exll::from_parts(snap.config, snap.global, classes, snap.fusion, snap.precision)?;
    model.check_invariants()?;
    Ok(model)
}

pub fn save_model(path: impl AsRef<Path>, model: &Exll) -> Result<()> {
    super::write_atomic(path.as_ref(), model_to_json(model)?.as_bytes())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Exll> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_json(&text, path)
}
