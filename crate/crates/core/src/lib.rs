//! Independent, identically distributed graph benchmarks.
//!
//! * [`graph`]: sparse labelled graphs, file bundles and block-model generation.
//! * [`sampler`]: random-walk subgraphs accepted by label-distribution KL.
//! * [`evaluator`]: leak-guarded two-set evaluation with grid search.
//! * [`overtuning`]: pseudo-label search over validation nodes and the
//!   validation-size sweep.
//! * [`stability`]: ranking inversions and accuracy variance.

pub mod error;
pub mod evaluator;
pub mod graph;
pub mod jsonio;
pub mod overtuning;
pub mod sampler;
pub mod seed;
pub mod stability;
pub mod summary;

pub use error::{Error, GuardViolation, Result};
pub use graph::Graph;
