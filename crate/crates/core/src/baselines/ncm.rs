use std::collections::BTreeMap;

use nalgebra::DVector;

use super::{require_label, Learner};
use crate::error::{Error, Result};
use crate::inference::Posterior;
use crate::stats::{check_dim, running_mean_update, FeatureVector, Label};

/// Nearest class mean under Euclidean distance.
///
/// Parameters: `C * (D + 1)` (mean and count per class).
#[derive(Clone, Debug, Default)]
pub struct NearestClassMean {
    classes: BTreeMap<Label, (DVector<f64>, u64)>,
}

impl NearestClassMean {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn mean(&self, label: Label) -> Option<&DVector<f64>> {
        self.classes.get(&label).map(|(m, _)| m)
    }

    fn dim(&self) -> Option<usize> {
        self.classes.values().next().map(|(m, _)| m.len())
    }
}

impl Learner for NearestClassMean {
    fn name(&self) -> &str {
        "ncm"
    }

    fn train_sample(&mut self, x: &FeatureVector) -> Result<()> {
        let label = require_label(x)?;
        let v = x.normalized()?;
        if let Some(d) = self.dim() {
            check_dim(d, v.dim())?;
        }
        let (mean, n) = self.classes.entry(label).or_insert_with(|| (DVector::zeros(v.dim()), 0));
        *n += 1;
        running_mean_update(mean, v.as_vector(), *n);
        Ok(())
    }

    fn predict(&self, x: &FeatureVector) -> Result<Posterior> {
        let d = self.dim().ok_or(Error::EmptyModel)?;
        let v = x.normalized()?;
        check_dim(d, v.dim())?;
        let labels: Vec<Label> = self.classes.keys().copied().collect();
        let scores: Vec<f64> =
            self.classes.values().map(|(m, _)| -(v.as_vector() - m).norm()).collect();
        Ok(Posterior::from_scores(labels, &scores))
    }

    fn param_count(&self) -> u64 {
        let d = self.dim().unwrap_or(0) as u64;
        self.classes.len() as u64 * (d + 1)
    }
}
