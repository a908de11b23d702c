use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("generation error: {0}")]
    Generation(String),

    #[error("random walk exhausted after {steps} steps with {collected} of {target} edges")]
    Exhausted {
        steps: u64,
        collected: usize,
        target: usize,
    },

    #[error(
        "no sample within thresholds after {attempts} attempts for slot {slot} \
         (best node KL {best_node_kl:.6}, best edge KL {best_edge_kl:.6})"
    )]
    ThresholdInfeasible {
        slot: usize,
        attempts: usize,
        best_node_kl: f64,
        best_edge_kl: f64,
    },

    #[error("split error: {0}")]
    Split(String),

    #[error("model error: {0}")]
    Model(String),

    #[error(transparent)]
    Guard(#[from] GuardViolation),

    #[error("graph {index}: {source}")]
    AtGraph {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// The innermost error, skipping per-graph wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtGraph { source, .. } => source.root(),
            other => other,
        }
    }
}

/// A read of a label the caller was not permitted to see.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("label access violation: node {node} is not in the permitted label set")]
pub struct GuardViolation {
    pub node: usize,
}
