//! Tree ensembles over randomized B-spline representations of time series.
//!
//! An ensemble classifier for fixed-length time series. Every tree in the
//! ensemble sees the training curves through its own least-squares B-spline
//! representation, with the spline order and basis count drawn at random per
//! tree. Prediction refits a new series onto each member's basis, routes the
//! coefficients through that member's tree and takes a majority vote.
//!
//! Modules:
//! - [`bspline`]: clamped uniform bases, Cox–de Boor evaluation, least-squares fits.
//! - [`tree`]: CART classifier with exhaustive or randomized split selection.
//! - [`ensemble`]: randomized spline ensembles and a plain random forest baseline.
//! - [`diversity`]: L² diversity diagnostics over per-member reconstructions.
//! - [`dataset`]: UCR text format loading and synthetic datasets.

pub mod bspline;
pub mod dataset;
pub mod diversity;
pub mod ensemble;
mod error;
pub mod tree;

pub use bspline::{BSplineBasis, CoefficientMatrix, DesignMatrix};
pub use dataset::{Dataset, DatasetSummary, Split};
pub use diversity::{DiversityReport, RepresentationSet};
pub use ensemble::{Ensemble, RfConfig, RstConfig, ThetaDraw, Variant};
pub use error::{Error, Result};
pub use tree::{DecisionTree, FeatureMatrix, SplitCandidate, SplitStrategy, TreeParams};
