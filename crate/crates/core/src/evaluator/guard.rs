//! Label-access guard. Models and the evaluation harness see a graph only
//! through [`GraphView`], which answers label reads for a permitted node
//! set and records every refusal. Held-out labels reach the harness only as
//! scalar accuracies through [`ValidationOracle`].

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use super::model::FittedModel;
use crate::error::{GuardViolation, Result};
use crate::graph::{Graph, SparseFeatures};

#[derive(Debug, Default)]
pub struct AccessLog {
    granted: AtomicU64,
    denied: AtomicU64,
    accuracy_queries: AtomicU64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessCounts {
    pub label_reads_granted: u64,
    pub label_reads_denied: u64,
    pub accuracy_queries: u64,
}

impl AccessLog {
    pub fn counts(&self) -> AccessCounts {
        AccessCounts {
            label_reads_granted: self.granted.load(Ordering::SeqCst),
            label_reads_denied: self.denied.load(Ordering::SeqCst),
            accuracy_queries: self.accuracy_queries.load(Ordering::SeqCst),
        }
    }
}

/// Read access to a graph with labels restricted to a permitted node set.
pub struct GraphView<'a> {
    graph: &'a Graph,
    permitted: Vec<bool>,
    log: &'a AccessLog,
}

impl<'a> GraphView<'a> {
    pub fn new(graph: &'a Graph, permitted: &[usize], log: &'a AccessLog) -> Self {
        let mut mask = vec![false; graph.n()];
        for &v in permitted {
            mask[v] = true;
        }
        GraphView {
            graph,
            permitted: mask,
            log,
        }
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn k(&self) -> usize {
        self.graph.k()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.graph.degree(v)
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        self.graph.neighbors(v)
    }

    pub fn features(&self) -> &SparseFeatures {
        self.graph.features()
    }

    pub fn feature_dim(&self) -> usize {
        self.graph.feature_dim()
    }

    pub fn is_permitted(&self, v: usize) -> bool {
        self.permitted[v]
    }

    pub fn label(&self, v: usize) -> Result<usize, GuardViolation> {
        if self.permitted.get(v).copied().unwrap_or(false) {
            self.log.granted.fetch_add(1, Ordering::SeqCst);
            Ok(self.graph.label(v))
        } else {
            self.log.denied.fetch_add(1, Ordering::SeqCst);
            Err(GuardViolation { node: v })
        }
    }

    /// `(node, label)` pairs for `nodes`, read through the guard.
    pub fn labeled_pairs(&self, nodes: &[usize]) -> Result<Vec<(usize, usize)>, GuardViolation> {
        nodes.iter().map(|&v| self.label(v).map(|y| (v, y))).collect()
    }

    pub(crate) fn log(&self) -> &'a AccessLog {
        self.log
    }
}

/// Scores predictions against a set of labels the caller cannot read.
pub trait AccuracyOracle: Sync {
    fn nodes(&self) -> &[usize];

    /// Accuracy of predictions aligned with [`AccuracyOracle::nodes`].
    fn score(&self, predictions: &[usize]) -> f64;

    fn score_model(&self, fitted: &dyn FittedModel) -> f64 {
        self.score(&fitted.predict(self.nodes()))
    }
}

/// Accuracy oracle over hidden labels. Every query is logged.
pub struct ValidationOracle<'a> {
    nodes: Vec<usize>,
    hidden: Vec<usize>,
    log: &'a AccessLog,
}

impl<'a> ValidationOracle<'a> {
    pub fn new(graph: &Graph, nodes: &[usize], log: &'a AccessLog) -> Self {
        ValidationOracle {
            nodes: nodes.to_vec(),
            hidden: nodes.iter().map(|&v| graph.label(v)).collect(),
            log,
        }
    }
}

impl AccuracyOracle for ValidationOracle<'_> {
    fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    fn score(&self, predictions: &[usize]) -> f64 {
        self.log.accuracy_queries.fetch_add(1, Ordering::SeqCst);
        let hits = predictions
            .iter()
            .zip(&self.hidden)
            .filter(|(p, y)| p == y)
            .count();
        hits as f64 / self.nodes.len().max(1) as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate_sbm;

    #[test]
    fn reads_outside_the_permitted_set_trip() {
        let g = generate_sbm(&[3, 3], 1.0, 0.0, 2, 1.0, 0).unwrap();
        let log = AccessLog::default();
        let view = GraphView::new(&g, &[0, 4], &log);
        assert_eq!(view.label(4).unwrap(), 1);
        assert_eq!(view.label(1), Err(GuardViolation { node: 1 }));
        assert_eq!(view.label(99), Err(GuardViolation { node: 99 }));
        let c = log.counts();
        assert_eq!((c.label_reads_granted, c.label_reads_denied), (1, 2));
    }

    #[test]
    fn oracle_counts_queries() {
        let g = generate_sbm(&[2, 2], 1.0, 0.0, 2, 1.0, 0).unwrap();
        let log = AccessLog::default();
        let oracle = ValidationOracle::new(&g, &[0, 1, 2, 3], &log);
        assert_eq!(oracle.score(&[0, 0, 1, 1]), 1.0);
        assert_eq!(oracle.score(&[0, 1, 1, 1]), 0.75);
        assert_eq!(log.counts().accuracy_queries, 2);
        assert_eq!(log.counts().label_reads_granted, 0);
    }
}
