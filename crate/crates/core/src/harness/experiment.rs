use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use super::netscore::{netscore_with, NetScoreParams};
use super::ordering::{make_ordering, Ordering, OrderingKind};
use crate::baselines::{ExllLearner, Learner, NaiveBayes, NearestClassMean, Perceptron, Slda};
use crate::error::{Error, Result};
use crate::io::{Dataset, Split};
use crate::model::{Exll, ExllConfig, InferenceMode};
use crate::precision::DEFAULT_SHRINKAGE;
use crate::stats::FeatureVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LearnerKind {
    #[serde(rename = "exll-f")]
    ExllFuse,
    #[serde(rename = "exll-p")]
    ExllPrinf,
    #[serde(rename = "exll-m")]
    ExllMcinf,
    #[serde(rename = "ncm")]
    Ncm,
    #[serde(rename = "slda")]
    Slda,
    #[serde(rename = "perceptron")]
    Perceptron,
    #[serde(rename = "nb")]
    NaiveBayes,
}

impl LearnerKind {
    pub const ALL: [LearnerKind; 7] = [
        LearnerKind::ExllFuse,
        LearnerKind::ExllPrinf,
        LearnerKind::ExllMcinf,
        LearnerKind::Ncm,
        LearnerKind::Slda,
        LearnerKind::Perceptron,
        LearnerKind::NaiveBayes,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LearnerKind::ExllFuse => "exll-f",
            LearnerKind::ExllPrinf => "exll-p",
            LearnerKind::ExllMcinf => "exll-m",
            LearnerKind::Ncm => "ncm",
            LearnerKind::Slda => "slda",
            LearnerKind::Perceptron => "perceptron",
            LearnerKind::NaiveBayes => "nb",
        }
    }

    pub fn build(self, exll: &ExllConfig) -> Result<Box<dyn Learner + Send>> {
        let model = |mode| -> Result<Box<dyn Learner + Send>> {
            Ok(Box::new(ExllLearner::new(Exll::new(exll.clone())?, mode)))
        };
        Ok(match self {
            LearnerKind::ExllFuse => model(InferenceMode::Fuse)?,
            LearnerKind::ExllPrinf => model(InferenceMode::Prinf)?,
            LearnerKind::ExllMcinf => model(InferenceMode::Mcinf)?,
            LearnerKind::Ncm => Box::new(NearestClassMean::new()),
            LearnerKind::Slda => Box::new(Slda::new(DEFAULT_SHRINKAGE)),
            LearnerKind::Perceptron => Box::new(Perceptron::new()),
            LearnerKind::NaiveBayes => Box::new(NaiveBayes::new()),
        })
    }
}

impl FromStr for LearnerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LearnerKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown learner {s:?}")))
    }
}

/// A full experiment: one learner, one ordering kind, several permutations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub learner: LearnerKind,
    /// Only read by the command line; library callers pass a [`Dataset`].
    #[serde(skip_serializing_if = "Option::is_none")]
    pub manifest: Option<std::path::PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub features: Option<std::path::PathBuf>,
    pub ordering: OrderingKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_shots: Option<usize>,
    pub permutations: usize,
    /// Explicit permutation seeds; when empty, `seed, seed + 1, ...` are used.
    pub seeds: Vec<u64>,
    pub seed: u64,
    pub jobs: usize,
    pub exll: ExllConfig,
    pub netscore: NetScoreParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            learner: LearnerKind::ExllFuse,
            manifest: None,
            features: None,
            ordering: OrderingKind::Iid,
            k_shots: None,
            permutations: 3,
            seeds: Vec::new(),
            seed: 0,
            jobs: 1,
            exll: ExllConfig::default(),
            netscore: NetScoreParams::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn permutation_seeds(&self) -> Vec<u64> {
        if self.seeds.is_empty() {
            (0..self.permutations as u64).map(|i| self.seed.wrapping_add(i)).collect()
        } else {
            self.seeds.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() && self.permutations == 0 {
            return Err(Error::InvalidConfig("at least one permutation is required".into()));
        }
        if self.jobs == 0 {
            return Err(Error::InvalidConfig("jobs must be at least 1".into()));
        }
        self.exll.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportKind {
    Run,
    Average,
}

fn finite_or_null<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub kind: ReportKind,
    pub learner: String,
    pub ordering: OrderingKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_shots: Option<usize>,
    pub seeds: Vec<u64>,
    pub top1_accuracy: f64,
    pub correct: u64,
    pub total: u64,
    pub train_samples: u64,
    pub param_count: u64,
    pub runtime_seconds: f64,
    /// `null` in JSON when accuracy is zero.
    #[serde(serialize_with = "finite_or_null")]
    pub netscore: f64,
    /// Instances kept by the low-shot ordering (one per category, drawn by seed).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub selected_instances: Vec<String>,
    pub config: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub runs: Vec<RunReport>,
    pub average: RunReport,
}

impl ExperimentReport {
    /// One JSON object per line: every run, then the average.
    pub fn to_jsonl(&self) -> String {
        self.runs
            .iter()
            .chain(std::iter::once(&self.average))
            .map(|r| serde_json::to_string(r).expect("report serializes") + "\n")
            .collect()
    }
}

/// Top-1 accuracy counts of a prepared learner over `indices`. Queries are
/// passed without their labels.
pub fn evaluate(learner: &dyn Learner, data: &Dataset, indices: &[usize]) -> Result<(u64, u64)> {
    let mut correct = 0;
    for &i in indices {
        let labeled = data.feature_vector(i);
        let query = FeatureVector::new(labeled.sample_id, None, labeled.values);
        if learner.predict(&query)?.predicted == data.class_of(i) {
            correct += 1;
        }
    }
    Ok((correct, indices.len() as u64))
}

/// One train-then-evaluate pass with the ordering drawn from `seed`.
/// Runtime is wall-clock over ordering, training and evaluation.
pub fn run_permutation(data: &Dataset, config: &ExperimentConfig, seed: u64) -> Result<RunReport> {
    let start = Instant::now();
    let ordering = Ordering { kind: config.ordering, seed, k_shots: config.k_shots };
    let plan = make_ordering(data.manifest(), &ordering)?;
    let mut learner = config.learner.build(&config.exll)?;
    for &i in &plan.indices {
        learner.train_sample(&data.feature_vector(i))?;
    }
    learner.prepare()?;
    let test = data.indices(Split::Test);
    if test.is_empty() {
        return Err(Error::InvalidConfig("manifest has no test samples".into()));
    }
    let (correct, total) = evaluate(learner.as_ref(), data, &test)?;
    let runtime_seconds = start.elapsed().as_secs_f64();
    let top1_accuracy = correct as f64 / total as f64;
    let param_count = learner.param_count();
    Ok(RunReport {
        kind: ReportKind::Run,
        learner: learner.name().to_string(),
        ordering: config.ordering,
        k_shots: config.k_shots,
        seeds: vec![seed],
        top1_accuracy,
        correct,
        total,
        train_samples: plan.indices.len() as u64,
        param_count,
        runtime_seconds,
        netscore: netscore_with(&config.netscore, top1_accuracy, param_count.max(1) as f64, runtime_seconds.max(1e-9))?,
        selected_instances: plan.selected_instances,
        config: serde_json::to_value(config).map_err(|e| Error::json("experiment config", e))?,
    })
}

/// Runs every permutation (in parallel when `jobs > 1`) and averages them.
/// Any failing permutation fails the whole experiment.
pub fn run_experiment(data: &Dataset, config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let seeds = config.permutation_seeds();
    let runs: Vec<RunReport> = if config.jobs == 1 {
        seeds.iter().map(|&s| run_permutation(data, config, s)).collect::<Result<_>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
        pool.install(|| seeds.par_iter().map(|&s| run_permutation(data, config, s)).collect::<Result<_>>())?
    };
    let average = average(&runs, config)?;
    Ok(ExperimentReport { runs, average })
}

fn average(runs: &[RunReport], config: &ExperimentConfig) -> Result<RunReport> {
    let n = runs.len() as f64;
    let first = runs.first().ok_or_else(|| Error::InvalidConfig("no runs to average".into()))?;
    let top1_accuracy = runs.iter().map(|r| r.top1_accuracy).sum::<f64>() / n;
    let param_count = (runs.iter().map(|r| r.param_count as f64).sum::<f64>() / n).round() as u64;
    let runtime_seconds = runs.iter().map(|r| r.runtime_seconds).sum::<f64>() / n;
    Ok(RunReport {
        kind: ReportKind::Average,
        learner: first.learner.clone(),
        ordering: first.ordering,
        k_shots: first.k_shots,
        seeds: runs.iter().flat_map(|r| r.seeds.iter().copied()).collect(),
        top1_accuracy,
        correct: runs.iter().map(|r| r.correct).sum(),
        total: runs.iter().map(|r| r.total).sum(),
        train_samples: runs.iter().map(|r| r.train_samples).sum(),
        param_count,
        runtime_seconds,
        netscore: netscore_with(&config.netscore, top1_accuracy, param_count.max(1) as f64, runtime_seconds.max(1e-9))?,
        selected_instances: Vec::new(),
        config: first.config.clone(),
    })
}

/// Summary table with one row per report.
pub fn reports_to_csv(reports: &[RunReport]) -> String {
    let mut out = String::from("learner,ordering,kind,seeds,top1_accuracy,param_count,runtime_seconds,netscore\n");
    for r in reports {
        let seeds: Vec<String> = r.seeds.iter().map(u64::to_string).collect();
        let kind = match r.kind {
            ReportKind::Run => "run",
            ReportKind::Average => "average",
        };
        let score = if r.netscore.is_finite() { format!("{:.4}", r.netscore) } else { String::new() };
        let _ = writeln!(
            out,
            "{},{},{},{},{:.4},{},{:.6},{}",
            r.learner,
            r.ordering,
            kind,
            seeds.join(";"),
            r.top1_accuracy,
            r.param_count,
            r.runtime_seconds,
            score
        );
    }
    out
}
