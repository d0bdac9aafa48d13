//! Streaming comparison learners sharing one interface with the main model.
//!
//! Every learner normalizes its inputs to unit norm, sees each sample once
//! and keeps no raw samples.

mod naive_bayes;
mod ncm;
mod perceptron;
mod slda;

pub use naive_bayes::NaiveBayes;
pub use ncm::NearestClassMean;
pub use perceptron::Perceptron;
pub use slda::Slda;

use crate::error::Result;
use crate::inference::Posterior;
use crate::model::{Exll, InferenceMode};
use crate::stats::FeatureVector;

pub trait Learner {
    fn name(&self) -> &str;

    fn train_sample(&mut self, x: &FeatureVector) -> Result<()>;

    /// Never mutates the learner.
    fn predict(&self, x: &FeatureVector) -> Result<Posterior>;

    /// Number of stored scalars, following the formula documented on each learner.
    fn param_count(&self) -> u64;

    /// Called once after training and before evaluation.
    fn prepare(&mut self) -> Result<()> {
        Ok(())
    }
}

/// The main model behind the [`Learner`] interface, with a fixed inference path.
#[derive(Clone, Debug)]
pub struct ExllLearner {
    pub model: Exll,
    pub mode: InferenceMode,
    name: String,
}

impl ExllLearner {
    pub fn new(model: Exll, mode: InferenceMode) -> Self {
        let suffix = match mode {
            InferenceMode::Prinf => "p",
            InferenceMode::Mcinf => "m",
            InferenceMode::Fuse => "f",
        };
        Self { model, mode, name: format!("exll-{suffix}") }
    }
}

impl Learner for ExllLearner {
    fn name(&self) -> &str {
        &self.name
    }

    fn train_sample(&mut self, x: &FeatureVector) -> Result<()> {
        self.model.train_sample(x)
    }

    fn predict(&self, x: &FeatureVector) -> Result<Posterior> {
        self.model.predict(&x.normalized()?, self.mode)
    }

    fn param_count(&self) -> u64 {
        self.model.param_count()
    }

    fn prepare(&mut self) -> Result<()> {
        self.model.prepare()
    }
}

/// Label of a training sample, or `MissingLabel`.
pub(crate) fn require_label(x: &FeatureVector) -> Result<crate::stats::Label> {
    x.label.ok_or_else(|| crate::error::Error::MissingLabel(x.sample_id.clone()))
}
