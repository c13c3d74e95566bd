//! Experiment harness for randomized spline tree ensembles: accuracy grids,
//! ensemble-size sweeps, fit timing and diversity reports, written as CSV.

pub mod config;
mod error;
pub mod experiment;
pub mod model;
pub mod reference;
pub mod report;

pub use config::{DatasetSpec, ExperimentConfig, SplitChoice};
pub use error::{BenchError, Result};
pub use model::Model;
