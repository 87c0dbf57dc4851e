//! Multiplicative attribute graph (MAG) model.
//!
//! Every node carries `L` binary attributes; attribute `l` owns a 2x2 affinity
//! matrix and the probability of a directed edge `i -> j` is the product of the
//! affinity entries selected by the endpoints' attribute values. This crate holds
//! the allocation-only core: graph storage, the generative model, variational EM
//! parameter estimation (exact, Taylor and fast evaluation paths), network
//! statistics, distribution distances and a logistic-regression baseline.
//!
//! Text formats, manifests and the command line live in the `magfit-cli` crate.
#![no_std]
// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod attributes;
pub mod baseline;
mod error;
pub mod fit;
pub mod graph;
mod math;
pub mod metrics;
pub mod model;
pub mod netstats;

pub use attributes::{binarize_by_median, AttributeTable, BinaryAttributeMatrix};
pub use error::{Error, Result};
pub use fit::{FitConfig, FitResult, Mode, VariationalPosterior};
pub use graph::{DirectedGraph, Direction};
pub use model::{AffinityMatrix, MagParams, ProbAdjacency};
