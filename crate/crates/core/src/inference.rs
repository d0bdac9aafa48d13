//! Two-level shrinkage-LDA inference and glocal pairwise fusion.
//!
//! * prototype inference scores every prototype `p` as `(Lp)^T x - p^T L p / 2`
//!   and pools the scores of each class;
//! * MegaCloud inference does the same with the class means;
//! * fusion looks up the `(global, local)` prediction pair in a counter tensor
//!   filled during training and returns the empirical distribution of true
//!   labels for that pair.

use std::borrow::Cow;
use std::collections::BTreeMap;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::precision::PrecisionMatrix;
use crate::stats::{ClassState, Label, UnitVector};

/// Class posterior. `labels` and `probabilities` are parallel and sorted by label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Posterior {
    pub labels: Vec<Label>,
    pub probabilities: Vec<f64>,
    pub predicted: Label,
}

impl Posterior {
    /// Softmax of `scores`; the prediction is the highest score, lowest label on ties.
    pub fn from_scores(labels: Vec<Label>, scores: &[f64]) -> Self {
        assert_eq!(labels.len(), scores.len());
        assert!(!labels.is_empty());
        let best = argmax(scores);
        let max = scores[best];
        let exp: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
        let total: f64 = exp.iter().sum();
        let probabilities = exp.into_iter().map(|e| e / total).collect();
        Self { predicted: labels[best], labels, probabilities }
    }

    /// Wraps an already-normalized distribution.
    pub fn from_probabilities(labels: Vec<Label>, probabilities: Vec<f64>) -> Self {
        assert_eq!(labels.len(), probabilities.len());
        let best = argmax(&probabilities);
        Self { predicted: labels[best], labels, probabilities }
    }

    pub fn probability_of(&self, label: Label) -> Option<f64> {
        self.labels.iter().position(|&l| l == label).map(|i| self.probabilities[i])
    }

    pub fn max_probability(&self) -> f64 {
        self.probabilities.iter().copied().fold(0.0, f64::max)
    }

    /// Most probable label other than `excluded`, with its probability.
    pub fn best_excluding(&self, excluded: Label) -> Option<(Label, f64)> {
        let mut best: Option<(Label, f64)> = None;
        for (&l, &p) in self.labels.iter().zip(&self.probabilities) {
            if l != excluded && best.is_none_or(|(_, bp)| p > bp) {
                best = Some((l, p));
            }
        }
        best
    }
}

/// Index of the first maximum.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// One linear discriminant `w^T x + b` built around a center `c`:
/// `w = L c`, `b = -c^T w / 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearUnit {
    pub weight: DVector<f64>,
    pub bias: f64,
}

impl LinearUnit {
    pub fn around(precision: &PrecisionMatrix, center: &DVector<f64>) -> Self {
        let weight = precision.apply(center);
        let bias = -0.5 * center.dot(&weight);
        Self { weight, bias }
    }

    pub fn score(&self, x: &DVector<f64>) -> f64 {
        self.weight.dot(x) + self.bias
    }
}

/// How per-prototype scores are pooled into one class score.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrinfPool {
    /// Best prototype of the class.
    #[default]
    Max,
    /// Log-sum-exp over the class's prototypes, i.e. a softmax over all
    /// prototypes whose mass is summed per class.
    Sum,
}

impl PrinfPool {
    fn pool(self, scores: impl Iterator<Item = f64> + Clone) -> f64 {
        let max = scores.clone().fold(f64::NEG_INFINITY, f64::max);
        match self {
            PrinfPool::Max => max,
            PrinfPool::Sum => max + scores.map(|s| (s - max).exp()).sum::<f64>().ln(),
        }
    }
}

/// Prototype discriminants for every class, consistent with one precision matrix.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LocalWeights {
    per_class: BTreeMap<Label, Vec<LinearUnit>>,
}

impl LocalWeights {
    pub fn build(classes: &BTreeMap<Label, ClassState>, precision: &PrecisionMatrix) -> Self {
        let per_class = classes
            .iter()
            .map(|(&k, c)| {
                (k, c.prototypes().iter().map(|p| LinearUnit::around(precision, p.centroid())).collect())
            })
            .collect();
        Self { per_class }
    }

    /// Recomputes (or appends) the unit of one prototype.
    pub(crate) fn refresh(&mut self, class: &ClassState, index: usize, precision: &PrecisionMatrix) {
        let unit = LinearUnit::around(precision, class.prototypes()[index].centroid());
        let units = self.per_class.entry(class.class_id()).or_default();
        if index < units.len() {
            units[index] = unit;
        } else {
            debug_assert_eq!(index, units.len());
            units.push(unit);
        }
    }

    pub fn units(&self, class: Label) -> &[LinearUnit] {
        self.per_class.get(&class).map_or(&[], Vec::as_slice)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FusionEntry {
    pub truth: Label,
    pub global: Label,
    pub local: Label,
    pub count: u64,
}

/// Sparse counter over `(true label, global prediction, local prediction)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<FusionEntry>", into = "Vec<FusionEntry>")]
pub struct FusionMatrix {
    // (global, local) -> truth -> count
    cells: BTreeMap<(Label, Label), BTreeMap<Label, u64>>,
}

impl FusionMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, truth: Label, global: Label, local: Label) {
        *self.cells.entry((global, local)).or_default().entry(truth).or_default() += 1;
    }

    pub fn get(&self, truth: Label, global: Label, local: Label) -> u64 {
        self.cells.get(&(global, local)).and_then(|row| row.get(&truth)).copied().unwrap_or(0)
    }

    /// `sum_k Phi(k, global, local)`.
    pub fn pair_mass(&self, global: Label, local: Label) -> u64 {
        self.cells.get(&(global, local)).map_or(0, |row| row.values().sum())
    }

    pub fn total(&self) -> u64 {
        self.cells.values().flat_map(BTreeMap::values).sum()
    }

    pub fn nonzero_count(&self) -> usize {
        self.cells.values().map(BTreeMap::len).sum()
    }

    /// Observed `(global, local)` pairs with their total mass.
    pub fn pairs(&self) -> impl Iterator<Item = ((Label, Label), u64)> + '_ {
        self.cells.iter().map(|(&pair, row)| (pair, row.values().sum()))
    }

    pub fn entries(&self) -> Vec<FusionEntry> {
        let mut out: Vec<FusionEntry> = self
            .cells
            .iter()
            .flat_map(|(&(global, local), row)| {
                row.iter().map(move |(&truth, &count)| FusionEntry { truth, global, local, count })
            })
            .collect();
        out.sort();
        out
    }

    /// Empirical distribution of the true label given the prediction pair,
    /// or `None` when the pair has never been observed.
    pub fn posterior(&self, labels: &[Label], global: Label, local: Label) -> Option<Posterior> {
        let row = self.cells.get(&(global, local))?;
        let mass: u64 = row.values().sum();
        if mass == 0 {
            return None;
        }
        let probabilities =
            labels.iter().map(|k| row.get(k).copied().unwrap_or(0) as f64 / mass as f64).collect();
        Some(Posterior::from_probabilities(labels.to_vec(), probabilities))
    }
}

impl From<Vec<FusionEntry>> for FusionMatrix {
    fn from(entries: Vec<FusionEntry>) -> Self {
        let mut m = FusionMatrix::new();
        for e in entries {
            *m.cells.entry((e.global, e.local)).or_default().entry(e.truth).or_default() += e.count;
        }
        m
    }
}

impl From<FusionMatrix> for Vec<FusionEntry> {
    fn from(m: FusionMatrix) -> Self {
        m.entries()
    }
}

/// All three posteriors for one query.
#[derive(Clone, Debug, PartialEq)]
pub struct FusionOutcome {
    pub global: Posterior,
    pub local: Posterior,
    pub fused: Posterior,
    /// False when the prediction pair was unseen and `fused` fell back to `global`.
    pub from_fusion: bool,
}

/// Read-only view of a trained model bound to one precision matrix.
pub struct Scorer<'a> {
    classes: &'a BTreeMap<Label, ClassState>,
    fusion: &'a FusionMatrix,
    precision: Cow<'a, PrecisionMatrix>,
    local: Cow<'a, LocalWeights>,
    global: Vec<LinearUnit>,
    labels: Vec<Label>,
    pool: PrinfPool,
}

impl<'a> Scorer<'a> {
    pub fn new(
        classes: &'a BTreeMap<Label, ClassState>,
        fusion: &'a FusionMatrix,
        precision: Cow<'a, PrecisionMatrix>,
        local: Cow<'a, LocalWeights>,
        pool: PrinfPool,
    ) -> Result<Self> {
        if classes.is_empty() {
            return Err(Error::EmptyModel);
        }
        let global = classes.values().map(|c| LinearUnit::around(&precision, c.mean())).collect();
        let labels = classes.keys().copied().collect();
        Ok(Self { classes, fusion, precision, local, global, labels, pool })
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn precision(&self) -> &PrecisionMatrix {
        &self.precision
    }

    pub fn classes(&self) -> &BTreeMap<Label, ClassState> {
        self.classes
    }

    fn check(&self, x: &UnitVector) -> Result<()> {
        crate::stats::check_dim(self.precision.dim(), x.dim())
    }

    /// Pooled prototype score per class, in label order.
    pub fn prinf_scores(&self, x: &UnitVector) -> Result<Vec<f64>> {
        self.check(x)?;
        let v = x.as_vector();
        Ok(self
            .labels
            .iter()
            .map(|&k| self.pool.pool(self.local.units(k).iter().map(|u| u.score(v))))
            .collect())
    }

    /// Class-mean score per class, in label order.
    pub fn mcinf_scores(&self, x: &UnitVector) -> Result<Vec<f64>> {
        self.check(x)?;
        Ok(self.global.iter().map(|u| u.score(x.as_vector())).collect())
    }

    pub fn prinf(&self, x: &UnitVector) -> Result<Posterior> {
        Ok(Posterior::from_scores(self.labels.clone(), &self.prinf_scores(x)?))
    }

    pub fn mcinf(&self, x: &UnitVector) -> Result<Posterior> {
        Ok(Posterior::from_scores(self.labels.clone(), &self.mcinf_scores(x)?))
    }

    pub fn fuse_detailed(&self, x: &UnitVector) -> Result<FusionOutcome> {
        let global = self.mcinf(x)?;
        let local = self.prinf(x)?;
        let (fused, from_fusion) =
            match self.fusion.posterior(&self.labels, global.predicted, local.predicted) {
                Some(p) => (p, true),
                None => (global.clone(), false),
            };
        Ok(FusionOutcome { global, local, fused, from_fusion })
    }

    pub fn fuse(&self, x: &UnitVector) -> Result<Posterior> {
        Ok(self.fuse_detailed(x)?.fused)
    }

    /// `(global, local)` predicted labels.
    pub fn prediction_pair(&self, x: &UnitVector) -> Result<(Label, Label)> {
        let g = argmax(&self.mcinf_scores(x)?);
        let l = argmax(&self.prinf_scores(x)?);
        Ok((self.labels[g], self.labels[l]))
    }
}
