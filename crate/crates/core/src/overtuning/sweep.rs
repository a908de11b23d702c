use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluator::{
    grid_search_with, predict_checked, accuracy, AccessLog, GraphView, HyperGrid, HyperParams,
    NodeClassifier, Split, ValidationOracle,
};
use crate::graph::Graph;
use crate::seed::{derive_seed, derived_rng, stream};
use crate::summary::{mean, spearman, std_dev};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub validation_size: usize,
    pub test_accuracy_mean: f64,
    pub test_accuracy_std: f64,
    /// Per seed, in seed order.
    pub test_accuracies: Vec<f64>,
    pub best_hparams: Vec<HyperParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub seeds: Vec<u64>,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    /// Spearman correlation between validation size and mean accuracy.
    pub fn spearman(&self) -> f64 {
        let sizes: Vec<f64> = self.rows.iter().map(|r| r.validation_size as f64).collect();
        let means: Vec<f64> = self.rows.iter().map(|r| r.test_accuracy_mean).collect();
        spearman(&sizes, &means)
    }

    /// Two columns, size and mean accuracy, with a header line.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("validation_size\tmean_accuracy\n");
        for r in &self.rows {
            out.push_str(&format!("{}\t{}\n", r.validation_size, r.test_accuracy_mean));
        }
        out
    }
}

/// Validation nodes in the random order used for seed `seed`. Every size
/// takes a prefix, so smaller validation sets nest inside larger ones.
pub fn sweep_order(valid: &[usize], seed: u64) -> Vec<usize> {
    let mut order = valid.to_vec();
    order.shuffle(&mut derived_rng(seed, stream::SWEEP, 0));
    order
}

/// Grid search against only the first `size` validation labels, then fit
/// the winner on the train part and score on the unlabeled set.
pub fn sweep_validation_size(
    model: &dyn NodeClassifier,
    grid: &HyperGrid,
    g: &Graph,
    split: &Split,
    sizes: &[usize],
    seeds: &[u64],
) -> Result<SweepReport> {
    let (train, valid) = split.train_valid()?;
    if sizes.is_empty() || seeds.is_empty() {
        return Err(Error::Domain("sweep needs at least one size and one seed".into()));
    }
    if sizes[0] == 0 || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("sizes must be positive and strictly increasing".into()));
    }
    if let Some(&s) = sizes.iter().find(|&&s| s > valid.len()) {
        return Err(Error::Domain(format!(
            "validation size {s} exceeds the {} validation nodes",
            valid.len()
        )));
    }

    let cells: Vec<(usize, usize)> = (0..sizes.len())
        .flat_map(|i| (0..seeds.len()).map(move |j| (i, j)))
        .collect();
    let results = cells
        .par_iter()
        .map(|&(i, j)| {
            let seed = seeds[j];
            let mut subset = sweep_order(valid, seed)[..sizes[i]].to_vec();
            subset.sort_unstable();
            let log = AccessLog::default();
            let view = GraphView::new(g, train, &log);
            let pairs = view.labeled_pairs(train)?;
            let oracle = ValidationOracle::new(g, &subset, &log);
            let chosen = grid_search_with(model, grid, &view, &pairs, &oracle, seed)?;
            let fitted = model.fit(&view, &pairs, &chosen.params, derive_seed(seed, stream::REFIT, 0))?;
            let predictions = predict_checked(fitted.as_ref(), &split.unlabeled, g.k())?;
            let acc = accuracy(&predictions, g.labels(), &split.unlabeled)?;
            Ok((acc, chosen.params))
        })
        .collect::<Result<Vec<_>>>()?;

    let rows = sizes
        .iter()
        .enumerate()
        .map(|(i, &size)| {
            let cell = &results[i * seeds.len()..(i + 1) * seeds.len()];
            let accs: Vec<f64> = cell.iter().map(|(a, _)| *a).collect();
            SweepRow {
                validation_size: size,
                test_accuracy_mean: mean(&accs),
                test_accuracy_std: std_dev(&accs),
                test_accuracies: accs,
                best_hparams: cell.iter().map(|(_, p)| p.clone()).collect(),
            }
        })
        .collect();
    Ok(SweepReport {
        seeds: seeds.to_vec(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluator::{grid_search, make_split, subdivide, PropLin};
    use crate::graph::generate_sbm;

    fn setup() -> (Graph, Split, HyperGrid) {
        let g = generate_sbm(&[40, 40], 0.1, 0.03, 8, 1.0, 2).unwrap();
        let split = subdivide(&make_split(&g, 0.4, 1).unwrap(), 0.5, 1).unwrap();
        let grid = HyperGrid::new()
            .with("depth", vec![0.into(), 2.into()])
            .with("epochs", vec![40.into()]);
        (g, split, grid)
    }

    #[test]
    fn rows_match_sizes_and_prefixes_nest() {
        let (g, split, grid) = setup();
        let r = sweep_validation_size(&PropLin, &grid, &g, &split, &[2, 5, 10], &[0, 1, 2]).unwrap();
        assert_eq!(r.rows.len(), 3);
        assert!(r.rows.iter().all(|row| row.test_accuracies.len() == 3));
        let order = sweep_order(split.valid.as_ref().unwrap(), 1);
        assert!(order[..2].iter().all(|v| order[..5].contains(v)));
    }

    #[test]
    fn full_size_is_the_standard_evaluation() {
        let (g, split, grid) = setup();
        let full = split.valid.as_ref().unwrap().len();
        let r = sweep_validation_size(&PropLin, &grid, &g, &split, &[full], &[7]).unwrap();
        let chosen = grid_search(&PropLin, &grid, &g, &split, 7).unwrap();
        assert_eq!(r.rows[0].best_hparams[0], chosen.params);
    }

    #[test]
    fn invalid_sizes() {
        let (g, split, grid) = setup();
        let full = split.valid.as_ref().unwrap().len();
        for sizes in [vec![full + 1], vec![5, 5], vec![0], vec![]] {
            assert!(sweep_validation_size(&PropLin, &grid, &g, &split, &sizes, &[0]).is_err());
        }
    }
}
