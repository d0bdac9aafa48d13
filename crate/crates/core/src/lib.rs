//! Single-pass, explainable prototype classifier for precomputed feature vectors.
//!
//! Training keeps exact streaming statistics (global mean and covariance,
//! per-class means), grows a set of prototypes per class through a density
//! condition, and fills a fusion tensor that later combines prototype-level
//! and class-level linear discriminants. Every prediction can be explained by
//! the training samples recorded on the winning prototypes.
//!
//! ```
//! use exll::{Exll, FeatureVector, InferenceMode};
//!
//! let mut model = Exll::default();
//! for (i, (label, v)) in [(0, [1.0, 0.1]), (0, [0.9, 0.0]), (0, [1.0, 0.2]),
//!                         (1, [0.1, 1.0]), (1, [0.0, 0.9]), (1, [0.2, 1.0])].into_iter().enumerate() {
//!     model.train_sample(&FeatureVector::labeled(format!("s{i}"), label, v.to_vec()))?;
//! }
//! let x = exll::normalize(&[0.9, 0.2])?;
//! assert_eq!(model.predict(&x, InferenceMode::Fuse)?.predicted, 0);
//! # Ok::<(), exll::Error>(())
//! ```

// `!(a >= b)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod error;
pub mod explain;
pub mod harness;
pub mod inference;
pub mod io;
pub mod model;
pub mod precision;
pub mod prototype;
pub mod stats;
pub mod synthetic;

pub use error::{Error, Result};
pub use inference::{FusionMatrix, Posterior, PrinfPool, Scorer};
pub use model::{Exll, ExllConfig, InferenceMode, TraceEvent};
pub use precision::{build_precision, PrecisionMatrix};
pub use prototype::{MegaCloud, Prototype, Winners};
pub use stats::{normalize, ClassState, CovarianceInit, FeatureVector, GlobalStats, Label, UnitVector};
