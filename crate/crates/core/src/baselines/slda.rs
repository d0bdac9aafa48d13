use std::collections::BTreeMap;

use nalgebra::DVector;

use super::{require_label, Learner};
use crate::error::{Error, Result};
use crate::inference::Posterior;
use crate::precision::{build_precision, PrecisionMatrix, DEFAULT_SHRINKAGE};
use crate::stats::{check_dim, running_mean_update, CovarianceInit, FeatureVector, GlobalStats, Label};

/// Streaming linear discriminant analysis: running class means, one shared
/// running covariance (seeded at zero) and a shrinkage-regularized
/// discriminant `mu_k^T L x - mu_k^T L mu_k / 2`.
///
/// Parameters: `C * (D + 1) + D^2 + D + 2`.
#[derive(Clone, Debug)]
pub struct Slda {
    epsilon: f64,
    means: BTreeMap<Label, (DVector<f64>, u64)>,
    shared: Option<GlobalStats>,
    precision: Option<PrecisionMatrix>,
}

impl Default for Slda {
    fn default() -> Self {
        Self::new(DEFAULT_SHRINKAGE)
    }
}

impl Slda {
    pub fn new(epsilon: f64) -> Self {
        Self { epsilon, means: BTreeMap::new(), shared: None, precision: None }
    }

    pub fn shared_stats(&self) -> Option<&GlobalStats> {
        self.shared.as_ref()
    }

    fn scores(&self, precision: &PrecisionMatrix, x: &DVector<f64>) -> Vec<f64> {
        let projected = precision.apply(x);
        self.means
            .values()
            .map(|(mu, _)| mu.dot(&projected) - 0.5 * mu.dot(&precision.apply(mu)))
            .collect()
    }
}

impl Learner for Slda {
    fn name(&self) -> &str {
        "slda"
    }

    fn train_sample(&mut self, x: &FeatureVector) -> Result<()> {
        let label = require_label(x)?;
        let v = x.normalized()?;
        let shared = self.shared.get_or_insert_with(|| GlobalStats::new(v.dim(), CovarianceInit::Zero));
        shared.update(&v)?;
        let (mean, n) = self.means.entry(label).or_insert_with(|| (DVector::zeros(v.dim()), 0));
        *n += 1;
        running_mean_update(mean, v.as_vector(), *n);
        Ok(())
    }

    fn predict(&self, x: &FeatureVector) -> Result<Posterior> {
        let shared = self.shared.as_ref().ok_or(Error::EmptyModel)?;
        let v = x.normalized()?;
        check_dim(shared.dim(), v.dim())?;
        let fresh;
        let precision = match &self.precision {
            Some(p) if p.built_at_count() == shared.count() => p,
            _ => {
                fresh = build_precision(shared, self.epsilon)?;
                &fresh
            }
        };
        let labels = self.means.keys().copied().collect();
        Ok(Posterior::from_scores(labels, &self.scores(precision, v.as_vector())))
    }

    fn param_count(&self) -> u64 {
        let d = self.shared.as_ref().map_or(0, |s| s.dim() as u64);
        if d == 0 {
            return 0;
        }
        self.means.len() as u64 * (d + 1) + d * d + d + 2
    }

    fn prepare(&mut self) -> Result<()> {
        if let Some(shared) = &self.shared {
            self.precision = Some(build_precision(shared, self.epsilon)?);
        }
        Ok(())
    }
}
