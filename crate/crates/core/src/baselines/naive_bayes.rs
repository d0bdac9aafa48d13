use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DVector;

use super::{require_label, Learner};
use crate::error::{Error, Result};
use crate::inference::Posterior;
use crate::stats::{check_dim, FeatureVector, Label};

pub const VARIANCE_FLOOR: f64 = 1e-6;

#[derive(Clone, Debug)]
struct ClassMoments {
    count: u64,
    mean: DVector<f64>,
    m2: DVector<f64>,
}

/// Streaming Gaussian naive Bayes with per-class, per-dimension Welford
/// moments and count-based priors. Variances are floored at [`VARIANCE_FLOOR`].
///
/// Parameters: `C * (2D + 1)`.
#[derive(Clone, Debug, Default)]
pub struct NaiveBayes {
    classes: BTreeMap<Label, ClassMoments>,
    total: u64,
}

impl NaiveBayes {
    pub fn new() -> Self {
        Self::default()
    }

    fn dim(&self) -> Option<usize> {
        self.classes.values().next().map(|c| c.mean.len())
    }

    /// Population variance of class `label`, floored.
    pub fn variance(&self, label: Label) -> Option<DVector<f64>> {
        self.classes.get(&label).map(|c| c.m2.map(|m2| (m2 / c.count as f64).max(VARIANCE_FLOOR)))
    }

    pub fn mean(&self, label: Label) -> Option<&DVector<f64>> {
        self.classes.get(&label).map(|c| &c.mean)
    }

    pub fn priors(&self) -> Vec<(Label, f64)> {
        self.classes.iter().map(|(&k, c)| (k, c.count as f64 / self.total as f64)).collect()
    }

    /// Unnormalized log posterior per class: log prior + log likelihood.
    pub fn log_joint(&self, x: &FeatureVector) -> Result<Vec<(Label, f64)>> {
        let d = self.dim().ok_or(Error::EmptyModel)?;
        let v = x.normalized()?;
        check_dim(d, v.dim())?;
        Ok(self
            .classes
            .iter()
            .map(|(&k, c)| {
                let prior = (c.count as f64 / self.total as f64).ln();
                let ll: f64 = (0..d)
                    .map(|i| {
                        let var = (c.m2[i] / c.count as f64).max(VARIANCE_FLOOR);
                        let diff = v.as_vector()[i] - c.mean[i];
                        -0.5 * (2.0 * PI * var).ln() - diff * diff / (2.0 * var)
                    })
                    .sum();
                (k, prior + ll)
            })
            .collect())
    }
}

impl Learner for NaiveBayes {
    fn name(&self) -> &str {
        "nb"
    }

    fn train_sample(&mut self, x: &FeatureVector) -> Result<()> {
        let label = require_label(x)?;
        let v = x.normalized()?;
        if let Some(d) = self.dim() {
            check_dim(d, v.dim())?;
        }
        let c = self.classes.entry(label).or_insert_with(|| ClassMoments {
            count: 0,
            mean: DVector::zeros(v.dim()),
            m2: DVector::zeros(v.dim()),
        });
        c.count += 1;
        let n = c.count as f64;
        for (i, &xi) in v.as_slice().iter().enumerate() {
            let delta = xi - c.mean[i];
            c.mean[i] += delta / n;
            c.m2[i] += delta * (xi - c.mean[i]);
        }
        self.total += 1;
        Ok(())
    }

    fn predict(&self, x: &FeatureVector) -> Result<Posterior> {
        let (labels, scores): (Vec<Label>, Vec<f64>) = self.log_joint(x)?.into_iter().unzip();
        Ok(Posterior::from_scores(labels, &scores))
    }

    fn param_count(&self) -> u64 {
        self.classes.len() as u64 * (2 * self.dim().unwrap_or(0) as u64 + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_sample_class_uses_the_floor() {
        let mut nb = NaiveBayes::new();
        nb.train_sample(&FeatureVector::labeled("a", 0, vec![1.0, 2.0])).unwrap();
        nb.train_sample(&FeatureVector::labeled("b", 1, vec![2.0, 1.0])).unwrap();
        nb.train_sample(&FeatureVector::labeled("c", 1, vec![2.0, 1.5])).unwrap();
        assert!(nb.variance(0).unwrap().iter().all(|&v| v == VARIANCE_FLOOR));
        let p = nb.predict(&FeatureVector::new("q", None, vec![1.0, 1.9])).unwrap();
        assert!(p.probabilities.iter().all(|p| p.is_finite()));
        let total: f64 = nb.priors().iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-15);
        assert_eq!(nb.param_count(), 2 * 5);
    }
}
