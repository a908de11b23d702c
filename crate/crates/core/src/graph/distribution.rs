use serde::{Deserialize, Serialize};

use super::Graph;
use crate::error::{Error, Result};

/// A probability vector over a fixed set of categories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteDistribution {
    probs: Vec<f64>,
}

impl DiscreteDistribution {
    /// Validates nonnegativity and normalisation (within 1e-9).
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Domain("distribution needs at least one category".into()));
        }
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::Domain("probabilities must be finite and nonnegative".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!("probabilities sum to {total}, not 1")));
        }
        Ok(DiscreteDistribution { probs })
    }

    /// Normalises category counts. At least one count must be positive.
    pub fn from_counts(counts: &[usize]) -> Result<Self> {
        let total: usize = counts.iter().sum();
        if total == 0 {
            return Err(Error::Domain("cannot normalise all-zero counts".into()));
        }
        Ok(DiscreteDistribution {
            probs: counts.iter().map(|&c| c as f64 / total as f64).collect(),
        })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn support_size(&self) -> usize {
        self.probs.len()
    }
}

/// Index of the unordered label pair `{a, b}` in a `k * k` category vector.
pub fn edge_category_index(a: usize, b: usize, k: usize) -> usize {
    a.min(b) * k + a.max(b)
}

pub fn node_label_distribution(g: &Graph) -> Result<DiscreteDistribution> {
    if g.n() == 0 {
        return Err(Error::Domain("graph has no nodes".into()));
    }
    let mut counts = vec![0usize; g.k()];
    for &y in g.labels() {
        counts[y] += 1;
    }
    DiscreteDistribution::from_counts(&counts)
}

/// Distribution of edges over unordered endpoint-label pairs. The support
/// has `k * k` entries indexed by [`edge_category_index`]; entries with
/// `a > b` are always zero.
pub fn edge_category_distribution(g: &Graph) -> Result<DiscreteDistribution> {
    if g.edge_count() == 0 {
        return Err(Error::Domain("edge category distribution of an edgeless graph".into()));
    }
    let k = g.k();
    let mut counts = vec![0usize; k * k];
    for (u, v) in g.edges() {
        counts[edge_category_index(g.label(u), g.label(v), k)] += 1;
    }
    DiscreteDistribution::from_counts(&counts)
}
