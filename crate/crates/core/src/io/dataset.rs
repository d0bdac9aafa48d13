use std::collections::HashMap;
use std::path::Path;

use super::features::{read_features, FeatureMatrix};
use super::manifest::{read_manifest, Manifest, Split};
use crate::error::{Error, Result};
use crate::stats::{FeatureVector, Label};

/// A manifest joined with its feature rows, with labels remapped to
/// contiguous class ids.
#[derive(Clone, Debug)]
pub struct Dataset {
    manifest: Manifest,
    features: FeatureMatrix,
    class_names: Vec<String>,
    class_ids: Vec<Label>,
}

impl Dataset {
    pub fn new(manifest: Manifest, features: FeatureMatrix) -> Result<Self> {
        manifest.validate(features.count() as u64)?;
        let class_names = manifest.class_names();
        let lookup: HashMap<&str, Label> =
            class_names.iter().enumerate().map(|(i, n)| (n.as_str(), i as Label)).collect();
        let class_ids = manifest.samples.iter().map(|s| lookup[s.label.as_str()]).collect();
        Ok(Self { manifest, features, class_names, class_ids })
    }

    /// Loads a manifest and its feature files. `features` replaces the
    /// manifest's own list when given.
    pub fn load(manifest_path: impl AsRef<Path>, features: Option<&Path>) -> Result<Self> {
        let manifest_path = manifest_path.as_ref();
        let manifest = read_manifest(manifest_path)?;
        let files = match features {
            Some(f) => vec![f.to_path_buf()],
            None => manifest.resolved_feature_files(manifest_path),
        };
        let mut iter = files.iter();
        let first = iter.next().ok_or(Error::ManifestMissingField {
            field: "feature_files",
            sample_id: String::new(),
        })?;
        let mut matrix = read_features(first)?;
        for f in iter {
            matrix.append(read_features(f)?)?;
        }
        Self::new(manifest, matrix)
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    pub fn features(&self) -> &FeatureMatrix {
        &self.features
    }

    pub fn dim(&self) -> usize {
        self.features.dim()
    }

    pub fn len(&self) -> usize {
        self.manifest.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.manifest.samples.is_empty()
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn class_count(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_of(&self, sample: usize) -> Label {
        self.class_ids[sample]
    }

    pub fn split_of(&self, sample: usize) -> Split {
        self.manifest.samples[sample].split
    }

    /// Manifest positions of the samples in `split`, in manifest order.
    pub fn indices(&self, split: Split) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.split_of(i) == split).collect()
    }

    pub fn find(&self, sample_id: &str) -> Option<usize> {
        self.manifest.samples.iter().position(|s| s.sample_id == sample_id)
    }

    /// The raw (unnormalized) feature row of a sample, widened to f64 and labeled.
    pub fn feature_vector(&self, sample: usize) -> FeatureVector {
        let record = &self.manifest.samples[sample];
        let values = self.features.row(record.row_index as usize).iter().map(|&v| f64::from(v)).collect();
        FeatureVector::labeled(record.sample_id.clone(), self.class_ids[sample], values)
    }
}
