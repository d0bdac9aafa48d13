//! The single-pass learner: one call to [`Exll::train_sample`] per labeled
//! sample, never revisiting it.

use std::borrow::Cow;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::{FusionMatrix, LocalWeights, Posterior, PrinfPool, Scorer};
use crate::precision::{build_precision, PrecisionMatrix, DEFAULT_SHRINKAGE};
use crate::prototype::{
    add_prototype, find_winners, is_novel, prototype_densities, update_prototype, Winners,
};
use crate::stats::{check_dim, ClassState, CovarianceInit, FeatureVector, GlobalStats, Label, UnitVector};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExllConfig {
    pub covariance_init: CovarianceInit,
    /// Shrinkage toward the identity before inverting the covariance.
    pub epsilon: f64,
    /// Rebuild the precision matrix every this many samples during training.
    /// `None` builds it once and keeps it for the rest of training.
    pub precision_refresh: Option<u64>,
    /// Samples seen before the first precision build; until then winner
    /// selection and training-time scoring use the identity.
    pub precision_warmup: u64,
    pub prinf_pool: PrinfPool,
    /// Absolute slack on the density condition so that rounding noise on
    /// exact ties (e.g. a query equal to a centroid) does not open clouds.
    pub novelty_tolerance: f64,
    /// Cap on member ids per exported rule (newest kept). The model always
    /// keeps the full record.
    pub max_members_per_rule: Option<usize>,
    /// Classes that must exist before a training sample is counted in the
    /// fusion tensor. With 1, samples of the first class are counted too,
    /// so that class has a populated pair under class-ordered streams; 2
    /// ignores every sample seen while the model cannot discriminate.
    pub fusion_min_classes: usize,
    /// Keep a per-sample log of winner/novelty decisions.
    pub record_trace: bool,
}

impl Default for ExllConfig {
    fn default() -> Self {
        Self {
            covariance_init: CovarianceInit::Paper,
            epsilon: DEFAULT_SHRINKAGE,
            precision_refresh: Some(100),
            precision_warmup: 2,
            prinf_pool: PrinfPool::Max,
            novelty_tolerance: 1e-12,
            max_members_per_rule: None,
            fusion_min_classes: 1,
            record_trace: false,
        }
    }
}

impl ExllConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::InvalidConfig(format!("epsilon must lie in (0, 1], got {}", self.epsilon)));
        }
        if self.precision_refresh == Some(0) {
            return Err(Error::InvalidConfig("precision_refresh must be positive".into()));
        }
        if self.fusion_min_classes == 0 {
            return Err(Error::InvalidConfig("fusion_min_classes must be at least 1".into()));
        }
        if !(self.novelty_tolerance >= 0.0) {
            return Err(Error::InvalidConfig("novelty_tolerance must be non-negative".into()));
        }
        Ok(())
    }
}

/// What happened to one training sample inside its class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub sample_id: String,
    pub label: Label,
    /// `None` when the sample opened a new class.
    pub winners: Option<Winners>,
    pub novel: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InferenceMode {
    /// Prototype-level (local) inference.
    Prinf,
    /// Class-mean (global) inference.
    Mcinf,
    /// Pairwise fusion of the two.
    Fuse,
}

impl InferenceMode {
    pub fn name(self) -> &'static str {
        match self {
            InferenceMode::Prinf => "prinf",
            InferenceMode::Mcinf => "mcinf",
            InferenceMode::Fuse => "fuse",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Exll {
    pub(crate) config: ExllConfig,
    pub(crate) global: Option<GlobalStats>,
    pub(crate) classes: BTreeMap<Label, ClassState>,
    pub(crate) fusion: FusionMatrix,
    pub(crate) precision: Option<PrecisionMatrix>,
    local_weights: LocalWeights,
    trace: Vec<TraceEvent>,
}

impl Default for Exll {
    fn default() -> Self {
        Self::new(ExllConfig::default()).expect("default config is valid")
    }
}

impl Exll {
    pub fn new(config: ExllConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            global: None,
            classes: BTreeMap::new(),
            fusion: FusionMatrix::new(),
            precision: None,
            local_weights: LocalWeights::default(),
            trace: Vec::new(),
        })
    }

    /// Reassembles a model from persisted parts, recomputing derived caches.
    pub(crate) fn from_parts(
        config: ExllConfig,
        global: Option<GlobalStats>,
        classes: BTreeMap<Label, ClassState>,
        fusion: FusionMatrix,
        precision: Option<PrecisionMatrix>,
    ) -> Result<Self> {
        config.validate()?;
        let local_weights = precision
            .as_ref()
            .map(|p| LocalWeights::build(&classes, p))
            .unwrap_or_default();
        Ok(Self { config, global, classes, fusion, precision, local_weights, trace: Vec::new() })
    }

    pub fn config(&self) -> &ExllConfig {
        &self.config
    }

    pub fn dim(&self) -> Option<usize> {
        self.global.as_ref().map(GlobalStats::dim)
    }

    pub fn sample_count(&self) -> u64 {
        self.global.as_ref().map_or(0, GlobalStats::count)
    }

    pub fn global_stats(&self) -> Option<&GlobalStats> {
        self.global.as_ref()
    }

    pub fn classes(&self) -> &BTreeMap<Label, ClassState> {
        &self.classes
    }

    pub fn class(&self, label: Label) -> Result<&ClassState> {
        self.classes.get(&label).ok_or(Error::UnknownClass(label))
    }

    pub fn labels(&self) -> Vec<Label> {
        self.classes.keys().copied().collect()
    }

    pub fn fusion(&self) -> &FusionMatrix {
        &self.fusion
    }

    /// Precision matrix currently cached for training.
    pub fn cached_precision(&self) -> Option<&PrecisionMatrix> {
        self.precision.as_ref()
    }

    pub fn prototype_count(&self) -> usize {
        self.classes.values().map(ClassState::prototype_count).sum()
    }

    pub fn trace(&self) -> &[TraceEvent] {
        &self.trace
    }

    pub fn take_trace(&mut self) -> Vec<TraceEvent> {
        std::mem::take(&mut self.trace)
    }

    /// Parameter count: global `D + 1 + D^2`; per class
    /// `D + 2 + g(D + 2) + g^2`; four per nonzero fusion cell.
    pub fn param_count(&self) -> u64 {
        let Some(d) = self.dim().map(|d| d as u64) else { return 0 };
        let global = d + 1 + d * d;
        let classes: u64 = self
            .classes
            .values()
            .map(|c| {
                let g = c.prototype_count() as u64;
                d + 2 + g * (d + 2) + g * g
            })
            .sum();
        global + classes + 4 * self.fusion.nonzero_count() as u64
    }

    fn precision_is_due(&self) -> bool {
        let count = self.sample_count();
        if count < self.config.precision_warmup.max(1) {
            return false;
        }
        match &self.precision {
            None => true,
            Some(p) if p.is_identity_fallback() => true,
            Some(p) => self
                .config
                .precision_refresh
                .is_some_and(|every| count - p.built_at_count() >= every),
        }
    }

    /// Rebuilds the training-time precision matrix if the refresh policy says so.
    pub fn refresh_policy(&mut self) -> Result<()> {
        if self.precision_is_due() {
            let stats = self.global.as_ref().expect("warmup implies statistics");
            self.install_precision(build_precision(stats, self.config.epsilon)?);
        }
        Ok(())
    }

    fn install_precision(&mut self, precision: PrecisionMatrix) {
        self.local_weights = LocalWeights::build(&self.classes, &precision);
        self.precision = Some(precision);
    }

    /// Precision matrix reflecting every sample seen so far (identity during warmup).
    fn current_precision(&self) -> Result<Cow<'_, PrecisionMatrix>> {
        let dim = self.dim().ok_or(Error::EmptyModel)?;
        let count = self.sample_count();
        if count < self.config.precision_warmup.max(1) {
            return Ok(match &self.precision {
                Some(p) => Cow::Borrowed(p),
                None => Cow::Owned(PrecisionMatrix::identity(dim)),
            });
        }
        match &self.precision {
            Some(p) if !p.is_identity_fallback() && p.built_at_count() == count => Ok(Cow::Borrowed(p)),
            _ => Ok(Cow::Owned(build_precision(self.global.as_ref().unwrap(), self.config.epsilon)?)),
        }
    }

    /// Brings the cached precision and prototype discriminants up to date so
    /// that [`Exll::scorer`] is cheap.
    pub fn prepare(&mut self) -> Result<()> {
        if self.classes.is_empty() {
            return Ok(());
        }
        if let Cow::Owned(p) = self.current_precision()? {
            self.install_precision(p);
        }
        Ok(())
    }

    /// Scorer over the current model state for external queries.
    pub fn scorer(&self) -> Result<Scorer<'_>> {
        if self.classes.is_empty() {
            return Err(Error::EmptyModel);
        }
        let precision = self.current_precision()?;
        let local = match (&precision, &self.precision) {
            (Cow::Borrowed(_), Some(_)) => Cow::Borrowed(&self.local_weights),
            _ => Cow::Owned(LocalWeights::build(&self.classes, &precision)),
        };
        Scorer::new(&self.classes, &self.fusion, precision, local, self.config.prinf_pool)
    }

    /// Scorer bound to the cached training-time precision (possibly stale).
    fn training_scorer(&self) -> Result<Scorer<'_>> {
        let precision = match &self.precision {
            Some(p) => Cow::Borrowed(p),
            None => Cow::Owned(PrecisionMatrix::identity(self.dim().ok_or(Error::EmptyModel)?)),
        };
        let local = match &self.precision {
            Some(_) => Cow::Borrowed(&self.local_weights),
            None => Cow::Owned(LocalWeights::build(&self.classes, &precision)),
        };
        Scorer::new(&self.classes, &self.fusion, precision, local, self.config.prinf_pool)
    }

    pub fn predict(&self, x: &UnitVector, mode: InferenceMode) -> Result<Posterior> {
        let scorer = self.scorer()?;
        match mode {
            InferenceMode::Prinf => scorer.prinf(x),
            InferenceMode::Mcinf => scorer.mcinf(x),
            InferenceMode::Fuse => scorer.fuse(x),
        }
    }

    pub fn prinf(&self, x: &UnitVector) -> Result<Posterior> {
        self.predict(x, InferenceMode::Prinf)
    }

    pub fn mcinf(&self, x: &UnitVector) -> Result<Posterior> {
        self.predict(x, InferenceMode::Mcinf)
    }

    pub fn fuse(&self, x: &UnitVector) -> Result<Posterior> {
        self.predict(x, InferenceMode::Fuse)
    }

    /// Test-then-train fusion update: predicts `x` with the model as it is
    /// *before* learning from it and counts the outcome. No-op while fewer
    /// than `fusion_min_classes` classes exist.
    pub fn fusion_train_step(&mut self, x: &UnitVector, truth: Label) -> Result<()> {
        if self.classes.is_empty() || self.classes.len() < self.config.fusion_min_classes {
            return Ok(());
        }
        let (global, local) = self.training_scorer()?.prediction_pair(x)?;
        self.fusion.record(truth, global, local);
        Ok(())
    }

    /// Learns one labeled sample.
    pub fn train_sample(&mut self, sample: &FeatureVector) -> Result<()> {
        let label = sample.label.ok_or_else(|| Error::MissingLabel(sample.sample_id.clone()))?;
        let x = sample.normalized()?;
        self.train_unit(&sample.sample_id, label, &x)
    }

    /// Same as [`Exll::train_sample`] for an already-normalized vector.
    pub fn train_unit(&mut self, sample_id: &str, label: Label, x: &UnitVector) -> Result<()> {
        match &self.global {
            Some(g) => check_dim(g.dim(), x.dim())?,
            None => self.global = Some(GlobalStats::new(x.dim(), self.config.covariance_init)),
        }

        self.refresh_policy()?;
        self.fusion_train_step(x, label)?;
        self.global.as_mut().unwrap().update(x)?;

        let Some(class) = self.classes.get_mut(&label) else {
            let class = ClassState::new(label, x, sample_id);
            if let Some(p) = &self.precision {
                self.local_weights.refresh(&class, 0, p);
            }
            self.classes.insert(label, class);
            if self.config.record_trace {
                self.trace.push(TraceEvent { sample_id: sample_id.into(), label, winners: None, novel: true });
            }
            return Ok(());
        };

        class.update(x)?;
        let identity;
        let precision = match &self.precision {
            Some(p) => p,
            None => {
                identity = PrecisionMatrix::identity(x.dim());
                &identity
            }
        };
        let winners = find_winners(class, precision.matrix(), x);
        let densities = prototype_densities(class);
        for (p, &d) in class.prototypes.iter_mut().zip(&densities) {
            p.density_cache = d;
        }
        let novel = is_novel(class.density(x.as_vector()), &densities, self.config.novelty_tolerance);
        let touched = if novel {
            add_prototype(class, x, sample_id, winners.first);
            class.prototype_count() - 1
        } else {
            update_prototype(class, x, sample_id, winners.first, winners.second);
            winners.first
        };
        if let Some(p) = &self.precision {
            self.local_weights.refresh(class, touched, p);
        }
        if self.config.record_trace {
            self.trace.push(TraceEvent { sample_id: sample_id.into(), label, winners: Some(winners), novel });
        }
        Ok(())
    }

    /// Cross-checks the structural invariants of the model.
    pub fn check_invariants(&self) -> Result<()> {
        let mut support = 0;
        for (&k, c) in &self.classes {
            let fail = |what: &str| Err(Error::Invariant(format!("class {k}: {what}")));
            if c.class_id() != k {
                return fail("class id does not match its key");
            }
            if c.prototype_count() == 0 || c.edges().side() != c.prototype_count() {
                return fail("prototype count disagrees with the edge matrix");
            }
            if !c.edges().is_symmetric_zero_diagonal() {
                return fail("edge matrix is not symmetric with zero diagonal");
            }
            if (c.sample_count() as usize) < c.prototype_count() {
                return fail("more prototypes than samples");
            }
            let class_support: u64 = c.prototypes().iter().map(|p| p.support()).sum();
            if class_support != c.sample_count() {
                return fail("prototype supports do not add up to the class sample count");
            }
            if c.prototypes().iter().any(|p| p.support() as usize != p.members().len() || !(p.radius() > 0.0)) {
                return fail("prototype support, members or radius inconsistent");
            }
            support += class_support;
        }
        if support != self.sample_count() {
            return Err(Error::Invariant(format!(
                "total support {support} differs from {} samples seen",
                self.sample_count()
            )));
        }
        Ok(())
    }
}
