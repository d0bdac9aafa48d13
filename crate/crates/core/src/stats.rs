//! Exact single-pass meta-parameters: the global mean, scalar product and
//! covariance of the whole stream, and the per-class mean and scalar product.
//!
//! All accumulation is done in `f64`, whatever the precision of the input.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prototype::{EdgeMatrix, Prototype};

/// Class index. Classes are identified by contiguous indices `0..C`.
pub type Label = u32;

/// Norms below this are treated as a corrupt (all-zero) export.
pub const MIN_NORM: f64 = 1e-12;

/// A raw feature vector as produced by the feature exporter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub sample_id: String,
    pub label: Option<Label>,
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(sample_id: impl Into<String>, label: Option<Label>, values: Vec<f64>) -> Self {
        Self { sample_id: sample_id.into(), label, values }
    }

    pub fn labeled(sample_id: impl Into<String>, label: Label, values: Vec<f64>) -> Self {
        Self::new(sample_id, Some(label), values)
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn normalized(&self) -> Result<UnitVector> {
        normalize(&self.values)
    }
}

/// A feature vector scaled to unit Euclidean norm.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitVector(DVector<f64>);

impl UnitVector {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn into_inner(self) -> DVector<f64> {
        self.0
    }
}

impl AsRef<DVector<f64>> for UnitVector {
    fn as_ref(&self) -> &DVector<f64> {
        &self.0
    }
}

/// Scales `raw` to unit Euclidean norm.
pub fn normalize(raw: &[f64]) -> Result<UnitVector> {
    let v = DVector::from_column_slice(raw);
    let norm = v.norm();
    if !(norm >= MIN_NORM) {
        return Err(Error::ZeroVector { norm });
    }
    Ok(UnitVector(v / norm))
}

/// In-place running mean: `mean <- (n-1)/n * mean + 1/n * x`, where `n` is the
/// count *including* `x`.
pub(crate) fn running_mean_update(mean: &mut DVector<f64>, x: &DVector<f64>, n: u64) {
    let keep = (n - 1) as f64 / n as f64;
    let step = 1.0 / n as f64;
    mean.zip_apply(x, |m, xi| *m = keep * *m + step * xi);
}

pub(crate) fn running_scalar_update(value: f64, sample: f64, n: u64) -> f64 {
    (n - 1) as f64 / n as f64 * value + sample / n as f64
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// How the global covariance is seeded by the first sample.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovarianceInit {
    /// `xi_1 = x_1 x_1^T`.
    #[default]
    Paper,
    /// `xi_1 = 0`, which makes the recurrence a (biased) streaming covariance.
    Zero,
}

/// Stream-wide mean, scalar product and covariance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalStats {
    count: u64,
    mean: DVector<f64>,
    scalar_product: f64,
    covariance: DMatrix<f64>,
    init: CovarianceInit,
}

impl GlobalStats {
    pub fn new(dim: usize, init: CovarianceInit) -> Self {
        Self {
            count: 0,
            mean: DVector::zeros(dim),
            scalar_product: 0.0,
            covariance: DMatrix::zeros(dim, dim),
            init,
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn scalar_product(&self) -> f64 {
        self.scalar_product
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn covariance_init(&self) -> CovarianceInit {
        self.init
    }

    /// Folds one unit-norm sample into the statistics.
    ///
    /// The centered outer product uses the mean *after* it has absorbed `x`.
    pub fn update(&mut self, x: &UnitVector) -> Result<()> {
        check_dim(self.dim(), x.dim())?;
        let x = x.as_vector();
        let sq_norm = x.norm_squared();
        self.count += 1;
        let n = self.count;
        let dim = self.dim();
        if n == 1 {
            self.mean.copy_from(x);
            self.scalar_product = sq_norm;
            match self.init {
                CovarianceInit::Paper => {
                    for i in 0..dim {
                        for j in 0..=i {
                            let v = x[i] * x[j];
                            self.covariance[(i, j)] = v;
                            self.covariance[(j, i)] = v;
                        }
                    }
                }
                CovarianceInit::Zero => self.covariance.fill(0.0),
            }
            return Ok(());
        }

        running_mean_update(&mut self.mean, x, n);
        self.scalar_product = running_scalar_update(self.scalar_product, sq_norm, n);

        let keep = (n - 1) as f64 / n as f64;
        let step = 1.0 / n as f64;
        let centered = x - &self.mean;
        // Lower triangle computed once and mirrored so the matrix stays exactly symmetric.
        for i in 0..dim {
            for j in 0..=i {
                let v = keep * self.covariance[(i, j)] + step * centered[i] * centered[j];
                self.covariance[(i, j)] = v;
                self.covariance[(j, i)] = v;
            }
        }
        Ok(())
    }
}

/// Per-class meta-parameters plus the class's prototypes and edge map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassState {
    pub(crate) class_id: Label,
    pub(crate) sample_count: u64,
    pub(crate) mean: DVector<f64>,
    pub(crate) scalar_product: f64,
    pub(crate) prototypes: Vec<Prototype>,
    pub(crate) edges: EdgeMatrix,
}

impl ClassState {
    /// Opens a class from its first sample, which also seeds its first prototype.
    pub fn new(class_id: Label, x: &UnitVector, sample_id: impl Into<String>) -> Self {
        let v = x.as_vector();
        Self {
            class_id,
            sample_count: 1,
            mean: v.clone(),
            scalar_product: v.norm_squared(),
            prototypes: vec![Prototype::new(v.clone(), sample_id.into())],
            edges: EdgeMatrix::new(1),
        }
    }

    pub fn class_id(&self) -> Label {
        self.class_id
    }

    pub fn sample_count(&self) -> u64 {
        self.sample_count
    }

    pub fn prototype_count(&self) -> usize {
        self.prototypes.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn scalar_product(&self) -> f64 {
        self.scalar_product
    }

    pub fn prototypes(&self) -> &[Prototype] {
        &self.prototypes
    }

    pub fn edges(&self) -> &EdgeMatrix {
        &self.edges
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Folds `x` into the class mean and scalar product.
    pub fn update(&mut self, x: &UnitVector) -> Result<()> {
        check_dim(self.dim(), x.dim())?;
        let v = x.as_vector();
        self.sample_count += 1;
        running_mean_update(&mut self.mean, v, self.sample_count);
        self.scalar_product =
            running_scalar_update(self.scalar_product, v.norm_squared(), self.sample_count);
        Ok(())
    }

    /// Recursive density of a point relative to this class:
    /// `1 / (1 + |x - mu|^2 + sigma - |mu|^2)`.
    pub fn density(&self, x: &DVector<f64>) -> f64 {
        let spread = (x - &self.mean).norm_squared();
        1.0 / (1.0 + spread + self.scalar_product - self.mean.norm_squared())
    }
}
