//! Data orderings, NetScore and multi-permutation experiment runs.

mod experiment;
mod netscore;
mod ordering;

pub use experiment::{
    evaluate, reports_to_csv, run_experiment, run_permutation, ExperimentConfig, ExperimentReport,
    LearnerKind, ReportKind, RunReport,
};
pub use netscore::{netscore, netscore_with, NetScoreParams};
pub use ordering::{make_ordering, Ordering, OrderingKind, OrderingPlan};
