use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::guard::{AccessLog, AccuracyOracle, GraphView, ValidationOracle};
use super::hyper::{HyperGrid, HyperParams};
use super::model::{predict_checked, NodeClassifier};
use super::split::Split;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::seed::{derive_seed, stream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearchResult {
    pub params: HyperParams,
    pub valid_accuracy: f64,
    /// Validation accuracy of every grid point in enumeration order.
    pub scores: Vec<f64>,
}

/// Seed used to fit grid point `index` under master `seed`.
pub fn grid_point_seed(seed: u64, index: usize) -> u64 {
    derive_seed(seed, stream::GRID, index as u64)
}

/// Fits every grid point on `train` and scores it with `oracle`. The first
/// point with the highest score wins.
pub fn grid_search_with(
    model: &dyn NodeClassifier,
    grid: &HyperGrid,
    view: &GraphView<'_>,
    train: &[(usize, usize)],
    oracle: &dyn AccuracyOracle,
    seed: u64,
) -> Result<GridSearchResult> {
    let points = grid.points();
    if points.is_empty() {
        return Err(Error::Domain("empty hyper-parameter grid".into()));
    }
    let scores = points
        .par_iter()
        .enumerate()
        .map(|(i, params)| {
            let fitted = model.fit(view, train, params, grid_point_seed(seed, i))?;
            let predictions = predict_checked(fitted.as_ref(), oracle.nodes(), view.k())?;
            Ok(oracle.score(&predictions))
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    Ok(GridSearchResult {
        params: points[best].clone(),
        valid_accuracy: scores[best],
        scores,
    })
}

/// Grid search on the train part of `split`, scored on its validation part.
pub fn grid_search(
    model: &dyn NodeClassifier,
    grid: &HyperGrid,
    g: &Graph,
    split: &Split,
    seed: u64,
) -> Result<GridSearchResult> {
    let (train, valid) = split.train_valid()?;
    let log = AccessLog::default();
    let view = GraphView::new(g, &split.labeled, &log);
    let pairs = view.labeled_pairs(train)?;
    let oracle = ValidationOracle::new(g, valid, &log);
    grid_search_with(model, grid, &view, &pairs, &oracle, seed)
}
