//! Shrinkage-regularized precision matrix `[(1 - eps) xi + eps I]^-1`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::GlobalStats;

pub const DEFAULT_SHRINKAGE: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrecisionMatrix {
    matrix: DMatrix<f64>,
    built_at_count: u64,
    /// Shrinkage used to build the matrix; `None` for the identity used
    /// before the covariance has warmed up.
    shrinkage: Option<f64>,
}

impl PrecisionMatrix {
    pub fn identity(dim: usize) -> Self {
        Self { matrix: DMatrix::identity(dim, dim), built_at_count: 0, shrinkage: None }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn built_at_count(&self) -> u64 {
        self.built_at_count
    }

    pub fn shrinkage(&self) -> Option<f64> {
        self.shrinkage
    }

    pub fn is_identity_fallback(&self) -> bool {
        self.shrinkage.is_none()
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.matrix * v
    }
}

/// The matrix that gets inverted: `(1 - eps) xi + eps I`.
pub fn regularized_covariance(covariance: &DMatrix<f64>, epsilon: f64) -> DMatrix<f64> {
    let dim = covariance.nrows();
    covariance * (1.0 - epsilon) + DMatrix::<f64>::identity(dim, dim) * epsilon
}

/// Inverts `(1 - eps) covariance + eps I` through a Cholesky factorization.
pub fn invert_regularized(covariance: &DMatrix<f64>, epsilon: f64) -> Result<DMatrix<f64>> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::DomainError(format!("shrinkage must lie in (0, 1], got {epsilon}")));
    }
    let regularized = regularized_covariance(covariance, epsilon);
    let mut matrix = regularized.cholesky().ok_or(Error::NotPositiveDefinite)?.inverse();
    // Mirror the lower triangle so downstream quadratic forms see an exactly symmetric matrix.
    let dim = matrix.nrows();
    for i in 0..dim {
        for j in 0..i {
            let v = 0.5 * (matrix[(i, j)] + matrix[(j, i)]);
            matrix[(i, j)] = v;
            matrix[(j, i)] = v;
        }
    }
    Ok(matrix)
}

/// Precision of the current global covariance.
pub fn build_precision(stats: &GlobalStats, epsilon: f64) -> Result<PrecisionMatrix> {
    let matrix = invert_regularized(stats.covariance(), epsilon)?;
    Ok(PrecisionMatrix { matrix, built_at_count: stats.count(), shrinkage: Some(epsilon) })
}
