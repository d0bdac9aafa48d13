//! Seeded Gaussian blob datasets in the same shape the feature exporter writes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{Dataset, FeatureMatrix, Manifest, SampleRecord, Split};

/// Blob layout. Raw vectors are `common * c + mean_k + within_std * noise`,
/// where `c` is one shared random unit direction and the class means have
/// length `separation`. When `classes < dim` the mean directions are
/// orthogonalized against `c` and each other, so every pair of means is
/// exactly `separation * sqrt(2)` apart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlobConfig {
    pub classes: usize,
    pub dim: usize,
    pub train_per_class: usize,
    pub test_per_class: usize,
    pub separation: f64,
    /// Per-coordinate standard deviation of the within-class noise.
    pub within_std: f64,
    pub common: f64,
    /// Training samples of a class are dealt round-robin to this many
    /// instance ids; zero leaves instance ids out.
    pub instances_per_class: usize,
    pub seed: u64,
}

impl Default for BlobConfig {
    fn default() -> Self {
        Self {
            classes: 10,
            dim: 50,
            train_per_class: 100,
            test_per_class: 100,
            separation: 1.0,
            within_std: 0.02,
            common: 1.0,
            instances_per_class: 0,
            seed: 0,
        }
    }
}

fn gaussian(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.sample(StandardNormal)).collect()
}

fn unit(v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    v.into_iter().map(|a| a / n).collect()
}

/// Generates the dataset; all randomness comes from `config.seed`.
pub fn gaussian_blobs(config: &BlobConfig) -> Result<Dataset> {
    if config.classes == 0 || config.dim == 0 {
        return Err(Error::InvalidConfig("blobs need at least one class and one dimension".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let common = unit(gaussian(&mut rng, config.dim));
    let orthogonal = config.classes < config.dim;
    let mut basis = vec![common.clone()];
    let mut means = Vec::with_capacity(config.classes);
    for _ in 0..config.classes {
        let mut v = gaussian(&mut rng, config.dim);
        if orthogonal {
            for b in &basis {
                let dot: f64 = v.iter().zip(b).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(b).for_each(|(a, b)| *a -= dot * b);
            }
        }
        let v = unit(v);
        basis.push(v.clone());
        means.push(v.into_iter().map(|a| a * config.separation).collect::<Vec<f64>>());
    }

    let mut samples = Vec::new();
    let mut rows: Vec<f32> = Vec::new();
    for (split, per_class) in [(Split::Train, config.train_per_class), (Split::Test, config.test_per_class)] {
        for (k, mean) in means.iter().enumerate() {
            for j in 0..per_class {
                let noise = gaussian(&mut rng, config.dim);
                rows.extend((0..config.dim).map(|d| {
                    (config.common * common[d] + mean[d] + config.within_std * noise[d]) as f32
                }));
                let tag = if split == Split::Train { "train" } else { "test" };
                samples.push(SampleRecord {
                    sample_id: format!("c{k}-{tag}-{j}"),
                    label: k.to_string(),
                    row_index: samples.len() as u64,
                    instance_id: (config.instances_per_class > 0)
                        .then(|| format!("c{k}-obj{}", j % config.instances_per_class)),
                    session_id: None,
                    split,
                });
            }
        }
    }
    let manifest = Manifest {
        dataset: format!("blobs-{}x{}-seed{}", config.classes, config.dim, config.seed),
        feature_files: Vec::new(),
        backbone: None,
        layer: None,
        samples,
    };
    Dataset::new(manifest, FeatureMatrix::new(config.dim, rows)?)
}
