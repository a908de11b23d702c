use std::sync::Arc;

use super::guard::GraphView;
use super::hyper::HyperParams;
use super::proplin::PropLin;
use crate::error::{Error, Result};

/// A trained predictor. Predictions cover any node of the graph it was fit on.
pub trait FittedModel: Send + Sync {
    fn predict(&self, nodes: &[usize]) -> Vec<usize>;
}

/// The train/predict contract every classifier satisfies.
///
/// `fit` sees the graph only through a [`GraphView`] and receives its
/// training labels as explicit `(node, label)` pairs, which may include
/// pseudo-labels. It must be deterministic given its inputs and `seed`.
pub trait NodeClassifier: Send + Sync {
    fn name(&self) -> &str;

    fn fit(
        &self,
        view: &GraphView<'_>,
        train: &[(usize, usize)],
        params: &HyperParams,
        seed: u64,
    ) -> Result<Box<dyn FittedModel>>;
}

/// Predicts `nodes` and rejects any label outside `[0, k)`.
pub fn predict_checked(fitted: &dyn FittedModel, nodes: &[usize], k: usize) -> Result<Vec<usize>> {
    let predictions = fitted.predict(nodes);
    if predictions.len() != nodes.len() {
        return Err(Error::Model(format!(
            "model returned {} predictions for {} nodes",
            predictions.len(),
            nodes.len()
        )));
    }
    if let Some(bad) = predictions.iter().find(|&&y| y >= k) {
        return Err(Error::Model(format!("predicted label {bad} outside [0, {k})")));
    }
    Ok(predictions)
}

/// Predicts the most frequent training label everywhere (lowest class on ties).
#[derive(Debug, Clone, Copy, Default)]
pub struct MajorityModel;

struct Constant(usize);

impl FittedModel for Constant {
    fn predict(&self, nodes: &[usize]) -> Vec<usize> {
        vec![self.0; nodes.len()]
    }
}

impl NodeClassifier for MajorityModel {
    fn name(&self) -> &str {
        "majority"
    }

    fn fit(
        &self,
        view: &GraphView<'_>,
        train: &[(usize, usize)],
        _params: &HyperParams,
        _seed: u64,
    ) -> Result<Box<dyn FittedModel>> {
        let mut counts = vec![0usize; view.k()];
        for &(_, y) in train {
            counts[y] += 1;
        }
        let best = (0..counts.len())
            .max_by(|&a, &b| counts[a].cmp(&counts[b]).then(b.cmp(&a)))
            .ok_or_else(|| Error::Model("graph has no classes".into()))?;
        Ok(Box::new(Constant(best)))
    }
}

/// Built-in classifiers by name: `proplin` and `majority`.
pub fn model_by_name(name: &str) -> Option<Arc<dyn NodeClassifier>> {
    match name {
        "proplin" => Some(Arc::new(PropLin)),
        "majority" => Some(Arc::new(MajorityModel)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluator::guard::AccessLog;
    use crate::graph::generate_sbm;

    #[test]
    fn majority_ties_go_to_the_lower_class() {
        let g = generate_sbm(&[2, 2], 1.0, 0.0, 2, 1.0, 0).unwrap();
        let log = AccessLog::default();
        let view = GraphView::new(&g, &[], &log);
        let fitted = MajorityModel
            .fit(&view, &[(0, 1), (2, 0)], &HyperParams::new(), 0)
            .unwrap();
        assert_eq!(fitted.predict(&[0, 1, 3]), vec![0, 0, 0]);
        let fitted = MajorityModel
            .fit(&view, &[(0, 1), (1, 1), (2, 0)], &HyperParams::new(), 0)
            .unwrap();
        assert_eq!(predict_checked(fitted.as_ref(), &[3], 2).unwrap(), vec![1]);
    }

    #[test]
    fn out_of_range_predictions_are_model_errors() {
        struct Bad;
        impl FittedModel for Bad {
            fn predict(&self, nodes: &[usize]) -> Vec<usize> {
                vec![9; nodes.len()]
            }
        }
        assert!(matches!(predict_checked(&Bad, &[0], 2), Err(Error::Model(_))));
    }

    #[test]
    fn registry() {
        assert_eq!(model_by_name("proplin").unwrap().name(), "proplin");
        assert!(model_by_name("gcn").is_none());
    }
}
