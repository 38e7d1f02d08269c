//! Cost-sensitive multi-class classification from score matrices.
//!
//! A base classifier's n x c score matrix is turned into class labels under
//! a c x c misclassification cost matrix, either by re-optimizing a weight
//! vector over the scores ([`reopt`]) or by calibrating the scores into
//! posteriors and taking the minimum expected cost class ([`calibration`]).
//! [`metrics`] computes multi-class AUC and costs, [`stats`] the rank
//! tests used to compare methods, and [`harness`] runs repeated
//! cross-validation experiments end to end.

pub mod baseline;
pub mod calibration;
pub mod costgen;
pub mod data;
pub mod error;
pub mod harness;
pub mod io;
pub mod metrics;
pub mod model;
pub mod reopt;
pub mod rng;
mod serde_ext;
pub mod stats;
pub mod synthetic;

pub use calibration::{CalibrationMethod, ProbabilityMatrix};
pub use data::{CostMatrix, LabelAssignment, LabeledDataset, PriorVector, ScoreMatrix};
pub use error::{Error, Result};
pub use harness::{ExperimentConfig, ExperimentReport};
pub use model::{FittedModel, Method};
pub use reopt::{GaConfig, MetaClassTree, WeightVector};
