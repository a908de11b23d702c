//! Two-set evaluation: labeled/unlabeled splits, the classifier contract,
//! the reference classifier, grid search and the per-graph pipeline.

mod guard;
mod hyper;
mod model;
mod pipeline;
mod proplin;
mod search;
mod split;

pub use guard::{AccessCounts, AccessLog, AccuracyOracle, GraphView, ValidationOracle};
pub use hyper::{HyperGrid, HyperParams, HyperValue};
pub use model::{model_by_name, predict_checked, FittedModel, MajorityModel, NodeClassifier};
pub use pipeline::{
    evaluate_graph, graph_seed, pipeline_evaluate, pipeline_evaluate_with, EvaluationReport,
    GraphEvaluation, GridSelector, HyperSelector,
};
pub use proplin::{propagate, PropLin, SELF_LOOP_WEIGHT};
pub use search::{grid_point_seed, grid_search, grid_search_with, GridSearchResult};
pub use split::{accuracy, make_split, subdivide, Split, MAX_SPLIT_DRAWS};

/// The built-in reference classifier.
pub fn reference_model() -> PropLin {
    PropLin
}
