//! Pseudo-label search over validation nodes.
//!
//! Every validation node gets a pseudo-label treated as a hyper-parameter.
//! Pseudo-labels start at the model's own predictions and are improved one
//! node at a time, in ascending node order, by refitting on the labeled set
//! plus all pseudo-labels for each candidate class and keeping the class
//! with the best validation accuracy. Hidden validation labels reach the
//! search only through scalar accuracy queries.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluator::{
    grid_search_with, predict_checked, AccessLog, AccuracyOracle, GraphView, HyperGrid,
    HyperParams, NodeClassifier, ValidationOracle,
};
use crate::graph::Graph;
use crate::seed::{derive_seed, stream};

/// Rule for replacing a node's initial prediction with the best candidate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdoptionRule {
    /// Adopt only when the best candidate scores strictly higher.
    #[default]
    Strict,
    /// Adopt whenever the best candidate scores at least as high.
    NonStrict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoLabelState {
    /// Searched validation nodes, ascending.
    pub nodes: Vec<usize>,
    pub initial_predictions: Vec<usize>,
    pub pseudo_labels: Vec<usize>,
    /// Validation accuracy of each candidate class, per searched node.
    pub candidate_accuracies: Vec<Vec<f64>>,
    /// Best candidate accuracy per searched node.
    pub per_node_chosen_acc: Vec<f64>,
    pub t: usize,
    pub k: usize,
}

impl PseudoLabelState {
    pub fn changed(&self) -> usize {
        self.initial_predictions
            .iter()
            .zip(&self.pseudo_labels)
            .filter(|(a, b)| a != b)
            .count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidUtilResult {
    pub test_accuracy: f64,
    pub state: PseudoLabelState,
    pub final_params: HyperParams,
    pub final_valid_accuracy: f64,
    /// Accuracy of the final model on its own training labels.
    pub train_fit_accuracy: f64,
    pub queries_search: u64,
    pub queries_total: u64,
    pub label_reads_granted: u64,
    pub label_reads_denied: u64,
    pub adoption_rule: AdoptionRule,
    pub node_order: String,
    pub final_selection: String,
}

/// Nodes whose labels are visible (`train`), hidden but queryable through
/// accuracy (`valid`) and held out for scoring (`test`).
#[derive(Debug, Clone, Copy)]
pub struct ValidUtilTask<'a> {
    pub graph: &'a Graph,
    pub train: &'a [usize],
    pub valid: &'a [usize],
    pub test: &'a [usize],
}

/// Accuracy of a grid-searched model trained on `task.train` only. This is
/// the zero-budget baseline.
pub fn plain_tuned_accuracy(
    model: &dyn NodeClassifier,
    task: &ValidUtilTask<'_>,
    final_grid: &HyperGrid,
    seed: u64,
) -> Result<f64> {
    Ok(validutil_partial(model, task, &HyperParams::new(), final_grid, seed, 0)?.test_accuracy)
}

pub fn validutil(
    model: &dyn NodeClassifier,
    task: &ValidUtilTask<'_>,
    base_hparams: &HyperParams,
    final_grid: &HyperGrid,
    seed: u64,
) -> Result<ValidUtilResult> {
    validutil_partial(model, task, base_hparams, final_grid, seed, task.valid.len())
}

/// Searches pseudo-labels for only the first `budget` validation nodes.
pub fn validutil_partial(
    model: &dyn NodeClassifier,
    task: &ValidUtilTask<'_>,
    base_hparams: &HyperParams,
    final_grid: &HyperGrid,
    seed: u64,
    budget: usize,
) -> Result<ValidUtilResult> {
    let log = AccessLog::default();
    let view = GraphView::new(task.graph, task.train, &log);
    let train = view.labeled_pairs(task.train)?;
    let mut valid = task.valid.to_vec();
    valid.sort_unstable();
    let oracle = ValidationOracle::new(task.graph, &valid, &log);
    let test_log = AccessLog::default();
    let test_oracle = ValidationOracle::new(task.graph, task.test, &test_log);
    validutil_with_oracle(
        model,
        &view,
        &train,
        &oracle,
        &test_oracle,
        base_hparams,
        final_grid,
        seed,
        budget,
        AdoptionRule::Strict,
    )
}

fn fit_seed(seed: u64, node: usize, class: usize) -> u64 {
    derive_seed(derive_seed(seed, stream::VALIDUTIL, node as u64 + 1), stream::VALIDUTIL, class as u64)
}

/// The search itself, against arbitrary accuracy oracles. `oracle` covers
/// the validation nodes; `test_oracle` scores the final model once.
#[allow(clippy::too_many_arguments)]
pub fn validutil_with_oracle(
    model: &dyn NodeClassifier,
    view: &GraphView<'_>,
    train: &[(usize, usize)],
    oracle: &dyn AccuracyOracle,
    test_oracle: &dyn AccuracyOracle,
    base_hparams: &HyperParams,
    final_grid: &HyperGrid,
    seed: u64,
    budget: usize,
    rule: AdoptionRule,
) -> Result<ValidUtilResult> {
    let t = oracle.nodes().len();
    if budget > t {
        return Err(Error::Domain(format!(
            "budget {budget} exceeds the {t} validation nodes"
        )));
    }
    if final_grid.is_empty() {
        return Err(Error::Domain("empty final hyper-parameter grid".into()));
    }
    let k = view.k();
    let log = view.log();
    let queries_before = log.counts().accuracy_queries;

    let mut nodes = oracle.nodes().to_vec();
    nodes.sort_unstable();
    nodes.truncate(budget);

    let initial_predictions = if nodes.is_empty() {
        Vec::new()
    } else {
        let fitted = model.fit(view, train, base_hparams, derive_seed(seed, stream::VALIDUTIL, 0))?;
        predict_checked(fitted.as_ref(), &nodes, k)?
    };

    let mut search_params = base_hparams.clone();
    search_params.set("dropout", 0.0);
    let mut pseudo_labels = initial_predictions.clone();
    let mut candidate_accuracies = Vec::with_capacity(nodes.len());
    let mut per_node_chosen_acc = Vec::with_capacity(nodes.len());
    for i in 0..nodes.len() {
        let accs = (0..k)
            .into_par_iter()
            .map(|class| {
                let mut labels = train.to_vec();
                labels.extend(nodes.iter().zip(&pseudo_labels).enumerate().map(
                    |(j, (&v, &y))| (v, if j == i { class } else { y }),
                ));
                let fitted = model.fit(view, &labels, &search_params, fit_seed(seed, nodes[i], class))?;
                let predictions = predict_checked(fitted.as_ref(), oracle.nodes(), k)?;
                Ok(oracle.score(&predictions))
            })
            .collect::<Result<Vec<f64>>>()?;
        let mut best = 0;
        for (class, &acc) in accs.iter().enumerate() {
            if acc > accs[best] {
                best = class;
            }
        }
        let original = initial_predictions[i];
        let adopt = match rule {
            AdoptionRule::Strict => accs[best] > accs[original],
            AdoptionRule::NonStrict => accs[best] >= accs[original],
        };
        pseudo_labels[i] = if adopt { best } else { original };
        per_node_chosen_acc.push(accs[best]);
        candidate_accuracies.push(accs);
    }
    let queries_search = log.counts().accuracy_queries - queries_before;

    let mut labels = train.to_vec();
    labels.extend(nodes.iter().copied().zip(pseudo_labels.iter().copied()));
    let chosen = grid_search_with(model, final_grid, view, &labels, oracle, seed)?;
    let fitted = model.fit(view, &labels, &chosen.params, derive_seed(seed, stream::REFIT, 0))?;
    let test_predictions = predict_checked(fitted.as_ref(), test_oracle.nodes(), k)?;
    let test_accuracy = test_oracle.score(&test_predictions);
    let train_nodes: Vec<usize> = labels.iter().map(|&(v, _)| v).collect();
    let fit_predictions = predict_checked(fitted.as_ref(), &train_nodes, k)?;
    let fit_hits = fit_predictions
        .iter()
        .zip(&labels)
        .filter(|(p, (_, y))| *p == y)
        .count();

    let counts = log.counts();
    Ok(ValidUtilResult {
        test_accuracy,
        state: PseudoLabelState {
            t: nodes.len(),
            k,
            nodes,
            initial_predictions,
            pseudo_labels,
            candidate_accuracies,
            per_node_chosen_acc,
        },
        final_params: chosen.params,
        final_valid_accuracy: chosen.valid_accuracy,
        train_fit_accuracy: fit_hits as f64 / labels.len() as f64,
        queries_search,
        queries_total: counts.accuracy_queries - queries_before,
        label_reads_granted: counts.label_reads_granted,
        label_reads_denied: counts.label_reads_denied,
        adoption_rule: rule,
        node_order: "ascending node index".into(),
        final_selection: "grid search scored on the same validation nodes".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluator::{make_split, subdivide, PropLin, Split};
    use crate::graph::generate_sbm;

    struct Constant<'a>(&'a [usize]);

    impl AccuracyOracle for Constant<'_> {
        fn nodes(&self) -> &[usize] {
            self.0
        }

        fn score(&self, _predictions: &[usize]) -> f64 {
            0.5
        }
    }

    fn setup(blocks: &[usize], seed: u64) -> (Graph, Split) {
        let g = generate_sbm(blocks, 0.15, 0.02, 8, 1.0, seed).unwrap();
        let split = subdivide(&make_split(&g, 0.3, seed).unwrap(), 0.5, seed).unwrap();
        (g, split)
    }

    fn grid() -> HyperGrid {
        HyperGrid::new()
            .with("depth", vec![1.into(), 2.into()])
            .with("epochs", vec![60.into()])
    }

    fn base() -> HyperParams {
        HyperParams::new().with("depth", 1).with("epochs", 60)
    }

    #[test]
    fn query_counts_and_no_denied_reads() {
        let (g, split) = setup(&[20, 20], 1);
        let (train, valid) = split.train_valid().unwrap();
        let task = ValidUtilTask { graph: &g, train, valid, test: &split.unlabeled };
        let r = validutil(&PropLin, &task, &base(), &grid(), 3).unwrap();
        assert_eq!(r.queries_search, (valid.len() * g.k()) as u64);
        assert_eq!(r.queries_total, r.queries_search + grid().len() as u64);
        assert_eq!(r.label_reads_denied, 0);
        assert_eq!(r.state.pseudo_labels.len(), valid.len());
        for (accs, &best) in r.state.candidate_accuracies.iter().zip(&r.state.per_node_chosen_acc) {
            assert_eq!(accs.iter().cloned().fold(f64::MIN, f64::max), best);
        }
    }

    #[test]
    fn zero_budget_is_the_plain_model() {
        let (g, split) = setup(&[20, 20], 2);
        let (train, valid) = split.train_valid().unwrap();
        let task = ValidUtilTask { graph: &g, train, valid, test: &split.unlabeled };
        let r = validutil_partial(&PropLin, &task, &base(), &grid(), 5, 0).unwrap();
        assert_eq!(r.state.t, 0);
        assert_eq!(r.queries_search, 0);
        assert_eq!(r.test_accuracy, plain_tuned_accuracy(&PropLin, &task, &grid(), 5).unwrap());

        let log = AccessLog::default();
        let view = GraphView::new(&g, train, &log);
        let pairs = view.labeled_pairs(train).unwrap();
        let oracle = ValidationOracle::new(&g, valid, &log);
        let chosen = grid_search_with(&PropLin, &grid(), &view, &pairs, &oracle, 5).unwrap();
        let fitted = PropLin.fit(&view, &pairs, &chosen.params, derive_seed(5, stream::REFIT, 0)).unwrap();
        let pred = fitted.predict(&split.unlabeled);
        let plain = crate::evaluator::accuracy(&pred, g.labels(), &split.unlabeled).unwrap();
        assert_eq!(r.test_accuracy, plain);
    }

    #[test]
    fn full_budget_is_validutil_and_overlarge_budget_errors() {
        let (g, split) = setup(&[15, 15], 3);
        let (train, valid) = split.train_valid().unwrap();
        let task = ValidUtilTask { graph: &g, train, valid, test: &split.unlabeled };
        let full = validutil(&PropLin, &task, &base(), &grid(), 1).unwrap();
        let partial = validutil_partial(&PropLin, &task, &base(), &grid(), 1, valid.len()).unwrap();
        assert_eq!(full, partial);
        assert!(matches!(
            validutil_partial(&PropLin, &task, &base(), &grid(), 1, valid.len() + 1),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn single_class_keeps_predictions() {
        let g = generate_sbm(&[30], 0.2, 0.0, 4, 1.0, 0).unwrap();
        let nodes: Vec<usize> = (0..30).collect();
        let task = ValidUtilTask { graph: &g, train: &nodes[..10], valid: &nodes[10..20], test: &nodes[20..] };
        let r = validutil(&PropLin, &task, &base(), &grid(), 0).unwrap();
        assert_eq!(r.state.pseudo_labels, r.state.initial_predictions);
        assert_eq!(r.queries_search, 10);
    }

    #[test]
    fn constant_oracle_adopts_nothing() {
        let (g, split) = setup(&[20, 20, 20], 4);
        let (train, valid) = split.train_valid().unwrap();
        let log = AccessLog::default();
        let view = GraphView::new(&g, train, &log);
        let pairs = view.labeled_pairs(train).unwrap();
        let oracle = Constant(valid);
        let test_log = AccessLog::default();
        let test = ValidationOracle::new(&g, &split.unlabeled, &test_log);
        let r = validutil_with_oracle(
            &PropLin, &view, &pairs, &oracle, &test, &base(), &grid(), 0, valid.len(), AdoptionRule::Strict,
        )
        .unwrap();
        assert_eq!(r.state.pseudo_labels, r.state.initial_predictions);
    }

    #[test]
    fn adoption_rules_differ_only_on_ties() {
        let (g, split) = setup(&[12, 12], 6);
        let (train, valid) = split.train_valid().unwrap();
        let log = AccessLog::default();
        let view = GraphView::new(&g, train, &log);
        let pairs = view.labeled_pairs(train).unwrap();
        let oracle = ValidationOracle::new(&g, valid, &log);
        let test_log = AccessLog::default();
        let test = ValidationOracle::new(&g, &split.unlabeled, &test_log);
        let run = |rule| {
            validutil_with_oracle(&PropLin, &view, &pairs, &oracle, &test, &base(), &grid(), 2, 1, rule).unwrap()
        };
        let strict = run(AdoptionRule::Strict);
        let loose = run(AdoptionRule::NonStrict);
        let accs = &strict.state.candidate_accuracies[0];
        let y0 = strict.state.initial_predictions[0];
        let best = accs.iter().cloned().fold(f64::MIN, f64::max);
        if strict.state.pseudo_labels != loose.state.pseudo_labels {
            assert_eq!(accs[y0], best);
            assert_ne!(strict.state.pseudo_labels[0], loose.state.pseudo_labels[0]);
        } else {
            assert_eq!(strict.test_accuracy, loose.test_accuracy);
        }
        assert_eq!(strict.state.candidate_accuracies, loose.state.candidate_accuracies);
    }
}
