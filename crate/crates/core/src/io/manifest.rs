use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub sample_id: String,
    /// Original label, kept verbatim. Numbers are accepted and stored in
    /// their decimal form.
    #[serde(deserialize_with = "label_from_any")]
    pub label: String,
    pub row_index: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub session_id: Option<String>,
    pub split: Split,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub dataset: String,
    /// Feature files whose rows are concatenated in this order; relative
    /// paths are resolved against the manifest's directory.
    #[serde(default)]
    pub feature_files: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backbone: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layer: Option<String>,
    pub samples: Vec<SampleRecord>,
}

fn label_from_any<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<String, D::Error> {
    struct V;
    impl Visitor<'_> for V {
        type Value = String;
        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a string or integer label")
        }
        fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<String, E> {
            Ok(v.to_string())
        }
        fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<String, E> {
            Ok(v.to_string())
        }
        fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<String, E> {
            Ok(v.to_string())
        }
    }
    d.deserialize_any(V)
}

impl Manifest {
    /// Distinct original labels in class-id order. Labels that all parse as
    /// integers sort numerically, otherwise lexicographically.
    pub fn class_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self.samples.iter().map(|s| s.label.clone()).collect();
        names.sort();
        names.dedup();
        let numeric: Option<Vec<i128>> = names.iter().map(|n| n.parse().ok()).collect();
        if let Some(keys) = numeric {
            let mut pairs: Vec<(i128, String)> = keys.into_iter().zip(names).collect();
            pairs.sort();
            names = pairs.into_iter().map(|(_, n)| n).collect();
        }
        names
    }

    /// Checks row indices against a feature matrix with `rows` rows.
    pub fn validate(&self, rows: u64) -> Result<()> {
        let mut seen = HashSet::with_capacity(self.samples.len());
        for s in &self.samples {
            if s.row_index >= rows {
                return Err(Error::DanglingRowIndex {
                    sample_id: s.sample_id.clone(),
                    row_index: s.row_index,
                    rows,
                });
            }
            if !seen.insert(s.row_index) {
                return Err(Error::DuplicateRowIndex { row_index: s.row_index });
            }
        }
        Ok(())
    }

    pub fn resolved_feature_files(&self, manifest_path: &Path) -> Vec<PathBuf> {
        let base = manifest_path.parent().unwrap_or(Path::new(""));
        self.feature_files.iter().map(|f| base.join(f)).collect()
    }
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Manifest> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))
}

pub fn write_manifest(path: impl AsRef<Path>, manifest: &Manifest) -> Result<()> {
    let mut text = serde_json::to_string_pretty(manifest).map_err(|e| Error::json("manifest", e))?;
    text.push('\n');
    super::write_atomic(path.as_ref(), text.as_bytes())
}
