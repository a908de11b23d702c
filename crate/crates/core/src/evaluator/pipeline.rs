use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::guard::{AccessCounts, AccessLog, AccuracyOracle, GraphView, ValidationOracle};
use super::hyper::{HyperGrid, HyperParams};
use super::model::{predict_checked, NodeClassifier};
use super::search::{grid_search_with, GridSearchResult};
use super::split::{accuracy, make_split, subdivide};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::seed::{derive_seed, stream};
use crate::summary::{mean, std_dev};

/// Chooses hyper-parameters from train labels and a validation oracle.
pub trait HyperSelector: Sync {
    fn describe(&self) -> String;

    fn select(
        &self,
        model: &dyn NodeClassifier,
        view: &GraphView<'_>,
        train: &[(usize, usize)],
        oracle: &dyn AccuracyOracle,
        seed: u64,
    ) -> Result<GridSearchResult>;
}

/// Exhaustive search over a grid.
pub struct GridSelector<'a>(pub &'a HyperGrid);

impl HyperSelector for GridSelector<'_> {
    fn describe(&self) -> String {
        format!("grid search over {} points", self.0.len())
    }

    fn select(
        &self,
        model: &dyn NodeClassifier,
        view: &GraphView<'_>,
        train: &[(usize, usize)],
        oracle: &dyn AccuracyOracle,
        seed: u64,
    ) -> Result<GridSearchResult> {
        grid_search_with(model, self.0, view, train, oracle, seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphEvaluation {
    pub graph_name: String,
    pub seed: u64,
    pub accuracy: f64,
    pub params: HyperParams,
    pub valid_accuracy: f64,
    pub search_train_size: usize,
    pub valid_size: usize,
    pub final_train_size: usize,
    pub test_size: usize,
    pub access: AccessCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub model_name: String,
    pub dataset_name: String,
    pub selection: String,
    pub seed: u64,
    pub labeled_fraction: f64,
    pub valid_fraction: f64,
    pub per_graph_accuracy: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    pub best_hparams_per_graph: Vec<HyperParams>,
    pub graphs: Vec<GraphEvaluation>,
}

/// Seed for graph `index` of a pipeline run under master `seed`.
pub fn graph_seed(seed: u64, index: usize) -> u64 {
    derive_seed(seed, stream::GRAPH, index as u64)
}

/// One graph through the pipeline: split, subdivide, select on
/// train/valid, refit on the whole labeled set, score the unlabeled set.
pub fn evaluate_graph(
    model: &dyn NodeClassifier,
    selector: &dyn HyperSelector,
    g: &Graph,
    labeled_fraction: f64,
    valid_fraction: f64,
    seed: u64,
) -> Result<GraphEvaluation> {
    let split = make_split(g, labeled_fraction, derive_seed(seed, stream::SPLIT, 0))?;
    let split = subdivide(&split, valid_fraction, derive_seed(seed, stream::SUBDIVIDE, 0))?;
    let (train, valid) = split.train_valid()?;

    let log = AccessLog::default();
    let view = GraphView::new(g, &split.labeled, &log);
    let train_pairs = view.labeled_pairs(train)?;
    let oracle = ValidationOracle::new(g, valid, &log);
    let chosen = selector.select(model, &view, &train_pairs, &oracle, seed)?;

    let labeled_pairs = view.labeled_pairs(&split.labeled)?;
    let fitted = model.fit(
        &view,
        &labeled_pairs,
        &chosen.params,
        derive_seed(seed, stream::REFIT, 0),
    )?;
    let predictions = predict_checked(fitted.as_ref(), &split.unlabeled, g.k())?;
    let acc = accuracy(&predictions, g.labels(), &split.unlabeled)?;

    Ok(GraphEvaluation {
        graph_name: g.name().to_string(),
        seed,
        accuracy: acc,
        params: chosen.params,
        valid_accuracy: chosen.valid_accuracy,
        search_train_size: train_pairs.len(),
        valid_size: valid.len(),
        final_train_size: labeled_pairs.len(),
        test_size: split.unlabeled.len(),
        access: log.counts(),
    })
}

fn dataset_name(graphs: &[Graph]) -> String {
    let first = graphs[0].name();
    let stem = first.split('/').next().unwrap_or(first);
    if graphs.iter().all(|g| g.name().split('/').next() == Some(stem)) {
        stem.to_string()
    } else {
        String::new()
    }
}

/// Runs every graph through the pipeline with grid search as the selection
/// step and aggregates mean and population std of the test accuracies.
pub fn pipeline_evaluate(
    model: &dyn NodeClassifier,
    grid: &HyperGrid,
    graphs: &[Graph],
    labeled_fraction: f64,
    valid_fraction: f64,
    seed: u64,
) -> Result<EvaluationReport> {
    pipeline_evaluate_with(
        model,
        &GridSelector(grid),
        graphs,
        labeled_fraction,
        valid_fraction,
        seed,
    )
}

pub fn pipeline_evaluate_with(
    model: &dyn NodeClassifier,
    selector: &dyn HyperSelector,
    graphs: &[Graph],
    labeled_fraction: f64,
    valid_fraction: f64,
    seed: u64,
) -> Result<EvaluationReport> {
    if graphs.is_empty() {
        return Err(Error::Domain("pipeline needs at least one graph".into()));
    }
    let evaluations = graphs
        .par_iter()
        .enumerate()
        .map(|(i, g)| {
            evaluate_graph(
                model,
                selector,
                g,
                labeled_fraction,
                valid_fraction,
                graph_seed(seed, i),
            )
            .map_err(|e| Error::AtGraph {
                index: i,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let per_graph_accuracy: Vec<f64> = evaluations.iter().map(|e| e.accuracy).collect();
    Ok(EvaluationReport {
        model_name: model.name().to_string(),
        dataset_name: dataset_name(graphs),
        selection: selector.describe(),
        seed,
        labeled_fraction,
        valid_fraction,
        mean: mean(&per_graph_accuracy),
        std: std_dev(&per_graph_accuracy),
        per_graph_accuracy,
        best_hparams_per_graph: evaluations.iter().map(|e| e.params.clone()).collect(),
        graphs: evaluations,
    })
}
