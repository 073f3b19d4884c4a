//! Nearest-neighbor estimation of Rényi, Tsallis and Shannon entropies and
//! related divergences.

// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimators;
pub mod harness;
pub mod knn;
pub mod reference;
pub mod sample;
pub mod special;

pub use error::{Error, Result};
pub use estimators::{EstimatorParams, EstimatorResult, Validity};
pub use knn::{Metric, MetricKind, NeighborDistances, SearchMethod};
pub use reference::ReferenceDistribution;
pub use sample::SampleMatrix;
