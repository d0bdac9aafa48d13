use std::collections::BTreeMap;

use nalgebra::DVector;

use super::{require_label, Learner};
use crate::error::{Error, Result};
use crate::inference::{argmax, Posterior};
use crate::stats::{check_dim, FeatureVector, Label, UnitVector};

/// Mistake-driven multiclass perceptron with unit learning rate.
///
/// A class's weight vector starts at zero when its first sample arrives.
/// Parameters: `C * D`.
#[derive(Clone, Debug, Default)]
pub struct Perceptron {
    weights: BTreeMap<Label, DVector<f64>>,
    mistakes: u64,
}

impl Perceptron {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn mistakes(&self) -> u64 {
        self.mistakes
    }

    pub fn weights(&self, label: Label) -> Option<&DVector<f64>> {
        self.weights.get(&label)
    }

    fn dim(&self) -> Option<usize> {
        self.weights.values().next().map(DVector::len)
    }

    fn scores(&self, v: &UnitVector) -> Vec<f64> {
        self.weights.values().map(|w| w.dot(v.as_vector())).collect()
    }
}

impl Learner for Perceptron {
    fn name(&self) -> &str {
        "perceptron"
    }

    fn train_sample(&mut self, x: &FeatureVector) -> Result<()> {
        let label = require_label(x)?;
        let v = x.normalized()?;
        if let Some(d) = self.dim() {
            check_dim(d, v.dim())?;
        }
        self.weights.entry(label).or_insert_with(|| DVector::zeros(v.dim()));
        let labels: Vec<Label> = self.weights.keys().copied().collect();
        let predicted = labels[argmax(&self.scores(&v))];
        if predicted != label {
            self.mistakes += 1;
            *self.weights.get_mut(&label).unwrap() += v.as_vector();
            *self.weights.get_mut(&predicted).unwrap() -= v.as_vector();
        }
        Ok(())
    }

    fn predict(&self, x: &FeatureVector) -> Result<Posterior> {
        let d = self.dim().ok_or(Error::EmptyModel)?;
        let v = x.normalized()?;
        check_dim(d, v.dim())?;
        Ok(Posterior::from_scores(self.weights.keys().copied().collect(), &self.scores(&v)))
    }

    fn param_count(&self) -> u64 {
        self.weights.len() as u64 * self.dim().unwrap_or(0) as u64
    }
}
