use serde::{Deserialize, Serialize};

use super::walk::SubgraphSample;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::summary::{mean, std_dev};

/// How the overlap of two node sets is normalised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlapMeasure {
    /// `|A ∩ B| / |A ∪ B|`
    #[default]
    Jaccard,
    /// `|A ∩ B| / (|A| + |B|)`
    SizeSum,
}

fn intersection_size(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

/// Mean pairwise node-set overlap over all unordered sample pairs.
pub fn overlap_rate(samples: &[SubgraphSample], measure: OverlapMeasure) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::Domain("overlap rate needs at least two samples".into()));
    }
    let mut total = 0.0;
    let mut pairs = 0usize;
    for (i, a) in samples.iter().enumerate() {
        for b in &samples[i + 1..] {
            let common = intersection_size(&a.parent_ids, &b.parent_ids) as f64;
            let sizes = (a.parent_ids.len() + b.parent_ids.len()) as f64;
            total += match measure {
                OverlapMeasure::Jaccard => common / (sizes - common),
                OverlapMeasure::SizeSum => common / sizes,
            };
            pairs += 1;
        }
    }
    Ok(total / pairs as f64)
}

/// Fraction of parent nodes present in at least one sample.
pub fn coverage_rate(samples: &[SubgraphSample], parent: &Graph) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Domain("coverage rate needs at least one sample".into()));
    }
    let mut covered = vec![false; parent.n()];
    for s in samples {
        for &v in &s.parent_ids {
            covered[v] = true;
        }
    }
    Ok(covered.iter().filter(|&&c| c).count() as f64 / parent.n() as f64)
}

/// Aggregate quality statistics of a sample family. Standard deviations
/// are population deviations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub sample_count: usize,
    pub mean_node_kl: f64,
    pub std_node_kl: f64,
    pub mean_edge_kl: f64,
    pub std_edge_kl: f64,
    pub overlap_rate: f64,
    pub overlap_measure: OverlapMeasure,
    pub coverage_rate: f64,
    pub mean_nodes: f64,
    pub std_nodes: f64,
}

pub fn dataset_stats(
    samples: &[SubgraphSample],
    parent: &Graph,
    measure: OverlapMeasure,
) -> Result<DatasetStats> {
    let node_kl: Vec<f64> = samples.iter().map(|s| s.node_kl).collect();
    let edge_kl: Vec<f64> = samples.iter().map(|s| s.edge_kl).collect();
    let nodes: Vec<f64> = samples.iter().map(|s| s.node_count() as f64).collect();
    Ok(DatasetStats {
        sample_count: samples.len(),
        overlap_rate: overlap_rate(samples, measure)?,
        overlap_measure: measure,
        coverage_rate: coverage_rate(samples, parent)?,
        mean_node_kl: mean(&node_kl),
        std_node_kl: std_dev(&node_kl),
        mean_edge_kl: mean(&edge_kl),
        std_edge_kl: std_dev(&edge_kl),
        mean_nodes: mean(&nodes),
        std_nodes: std_dev(&nodes),
    })
}
