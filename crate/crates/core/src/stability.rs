//! Ranking stability across seeds and the variance of per-graph accuracy.

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluator::{evaluate_graph, pipeline_evaluate, GridSelector, HyperGrid, NodeClassifier};
use crate::graph::Graph;
use crate::summary::std_dev;

/// Models of one seed, best mean accuracy first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingSequence {
    pub seed: u64,
    pub models: Vec<String>,
    pub accuracies: Vec<f64>,
}

impl RankingSequence {
    /// Sorts by accuracy descending, exact ties by model name.
    pub fn from_scores(seed: u64, scores: &[(String, f64)]) -> Result<Self> {
        let mut sorted = scores.to_vec();
        sorted.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        if sorted.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Domain("model names must be unique".into()));
        }
        Ok(RankingSequence {
            seed,
            models: sorted.iter().map(|(m, _)| m.clone()).collect(),
            accuracies: sorted.iter().map(|&(_, a)| a).collect(),
        })
    }
}

/// Out-of-order pairs in `seq` by merge sort. Leaves `seq` sorted.
fn count_inversions(seq: &mut [usize]) -> u64 {
    if seq.len() < 2 {
        return 0;
    }
    let mid = seq.len() / 2;
    let mut count = count_inversions(&mut seq[..mid]) + count_inversions(&mut seq[mid..]);
    let mut merged = Vec::with_capacity(seq.len());
    let (mut i, mut j) = (0, mid);
    while i < mid && j < seq.len() {
        if seq[i] <= seq[j] {
            merged.push(seq[i]);
            i += 1;
        } else {
            count += (mid - i) as u64;
            merged.push(seq[j]);
            j += 1;
        }
    }
    merged.extend_from_slice(&seq[i..mid]);
    merged.extend_from_slice(&seq[j..]);
    seq.copy_from_slice(&merged);
    count
}

/// Total number of model pairs ordered differently from `reference`,
/// summed over `others`.
pub fn inversion_number(reference: &RankingSequence, others: &[RankingSequence]) -> Result<u64> {
    let position: HashMap<&str, usize> = reference
        .models
        .iter()
        .enumerate()
        .map(|(i, m)| (m.as_str(), i))
        .collect();
    if position.len() != reference.models.len() {
        return Err(Error::Domain("reference ranks a model twice".into()));
    }
    let mut total = 0;
    for other in others {
        let mut seq = other
            .models
            .iter()
            .map(|m| position.get(m.as_str()).copied())
            .collect::<Option<Vec<usize>>>()
            .ok_or_else(|| Error::Domain(format!("seed {} ranks a different model set", other.seed)))?;
        let mut check = seq.clone();
        check.sort_unstable();
        check.dedup();
        if check.len() != position.len() || seq.len() != position.len() {
            return Err(Error::Domain(format!(
                "seed {} ranks a different model set",
                other.seed
            )));
        }
        total += count_inversions(&mut seq);
    }
    Ok(total)
}

/// A named classifier with its search grid.
#[derive(Clone)]
pub struct ModelEntry {
    pub name: String,
    pub model: Arc<dyn NodeClassifier>,
    pub grid: HyperGrid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub seeds: Vec<u64>,
    pub rankings: Vec<RankingSequence>,
    pub inversion_number: u64,
    /// Largest possible value: one full reversal per non-reference seed.
    pub max_inversion_number: u64,
}

/// Evaluates every model under every seed with the pipeline, ranks models
/// per seed and counts inversions against the first seed's ranking.
pub fn stability_experiment(
    models: &[ModelEntry],
    graphs: &[Graph],
    seeds: &[u64],
    labeled_fraction: f64,
    valid_fraction: f64,
) -> Result<StabilityReport> {
    if models.is_empty() || seeds.is_empty() {
        return Err(Error::Domain("need at least one model and one seed".into()));
    }
    let cells: Vec<(usize, usize)> = (0..seeds.len())
        .flat_map(|s| (0..models.len()).map(move |m| (s, m)))
        .collect();
    let means = cells
        .par_iter()
        .map(|&(s, m)| {
            let e = &models[m];
            pipeline_evaluate(e.model.as_ref(), &e.grid, graphs, labeled_fraction, valid_fraction, seeds[s])
                .map(|r| r.mean)
        })
        .collect::<Result<Vec<f64>>>()?;
    let rankings = seeds
        .iter()
        .enumerate()
        .map(|(s, &seed)| {
            let scores: Vec<(String, f64)> = models
                .iter()
                .enumerate()
                .map(|(m, e)| (e.name.clone(), means[s * models.len() + m]))
                .collect();
            RankingSequence::from_scores(seed, &scores)
        })
        .collect::<Result<Vec<_>>>()?;
    let m = models.len() as u64;
    Ok(StabilityReport {
        seeds: seeds.to_vec(),
        inversion_number: inversion_number(&rankings[0], &rankings[1..])?,
        max_inversion_number: m * (m - 1) / 2 * (seeds.len() as u64 - 1),
        rankings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceComparison {
    pub std_iid: f64,
    pub std_splits: f64,
    pub iid_accuracies: Vec<f64>,
    pub split_accuracies: Vec<f64>,
}

/// Split settings of one arm of [`variance_comparison`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub labeled_fraction: f64,
    pub valid_fraction: f64,
}

/// Std of per-graph accuracy over `samples` (one pipeline run with
/// `iid_seed`) against std over random splits of `single_graph`, one split
/// per entry of `split_seeds`.
#[allow(clippy::too_many_arguments)]
pub fn variance_comparison(
    model: &dyn NodeClassifier,
    grid: &HyperGrid,
    samples: &[Graph],
    iid: SplitSpec,
    iid_seed: u64,
    single_graph: &Graph,
    splits: SplitSpec,
    split_seeds: &[u64],
) -> Result<VarianceComparison> {
    if split_seeds.is_empty() {
        return Err(Error::Domain("need at least one split seed".into()));
    }
    let report = pipeline_evaluate(model, grid, samples, iid.labeled_fraction, iid.valid_fraction, iid_seed)?;
    let selector = GridSelector(grid);
    let split_accuracies = split_seeds
        .par_iter()
        .enumerate()
        .map(|(i, &seed)| {
            evaluate_graph(model, &selector, single_graph, splits.labeled_fraction, splits.valid_fraction, seed)
                .map(|e| e.accuracy)
                .map_err(|e| Error::AtGraph { index: i, source: Box::new(e) })
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(VarianceComparison {
        std_iid: report.std,
        std_splits: std_dev(&split_accuracies),
        iid_accuracies: report.per_graph_accuracy,
        split_accuracies,
    })
}
