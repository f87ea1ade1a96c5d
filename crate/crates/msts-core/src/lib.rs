//! Feature subset selection for multivariate time series classification.
//!
//! The pipeline: precompute per-feature pairwise DTW matrices once, derive
//! single-feature 1NN predictions by cross-validation, turn those into a
//! correlation model (adjusted mutual information), and grow a feature
//! subset greedily by merit. A wrapper search scored directly by CV
//! accuracy and a tabular merit comparison are included for evaluation.
//!
//! Heavy stages (tensor construction, per-feature predictions, candidate
//! scoring) run data-parallel under the default `parallel` feature and
//! have sequential fallbacks; outputs are bit-identical either way.

pub mod cfs;
pub mod classify;
pub mod cpu;
pub mod dataset;
pub mod dtw;
pub mod error;
pub mod folds;
pub mod info;
pub mod merit;
pub mod pipeline;
pub mod selection;
pub mod tabular;
pub mod tensor;

pub use classify::{EvalMode, PredictionMatrix};
pub use dataset::TimeSeriesDataset;
pub use dtw::WarpingParams;
pub use error::{Error, Result};
pub use folds::FoldAssignment;
pub use merit::CorrelationModel;
pub use selection::{Method, SelectionResult, SelectionTrace, StopReason};
pub use tabular::TabularDataset;
pub use tensor::DistanceTensor;
