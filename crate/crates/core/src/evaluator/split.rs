use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::seed::rng_from;

/// Draws allowed before giving up on a split that labels every class.
pub const MAX_SPLIT_DRAWS: usize = 100;

/// Labeled/unlabeled partition, optionally with the labeled set divided
/// into train and validation parts. All node lists are ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub labeled: Vec<usize>,
    pub unlabeled: Vec<usize>,
    pub train: Option<Vec<usize>>,
    pub valid: Option<Vec<usize>>,
}

impl Split {
    pub fn train_valid(&self) -> Result<(&[usize], &[usize])> {
        match (&self.train, &self.valid) {
            (Some(t), Some(v)) => Ok((t, v)),
            _ => Err(Error::Split("split has no train/validation division".into())),
        }
    }

    pub fn check(&self, n: usize) -> Result<()> {
        let mut owner = vec![0u8; n];
        for &v in &self.labeled {
            owner[v] |= 1;
        }
        for &v in &self.unlabeled {
            owner[v] |= 2;
        }
        if owner.iter().any(|&o| o != 1 && o != 2) {
            return Err(Error::Split("labeled and unlabeled must partition the nodes".into()));
        }
        if let (Some(t), Some(v)) = (&self.train, &self.valid) {
            let mut joined: Vec<usize> = t.iter().chain(v).copied().collect();
            joined.sort_unstable();
            if joined != self.labeled {
                return Err(Error::Split("train and valid must partition the labeled set".into()));
            }
        }
        Ok(())
    }
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

/// Uniform labeled/unlabeled split with `round(labeled_fraction * n)`
/// labeled nodes, redrawn until every class has a labeled node.
pub fn make_split(g: &Graph, labeled_fraction: f64, rng_seed: u64) -> Result<Split> {
    if !(labeled_fraction > 0.0 && labeled_fraction < 1.0) {
        return Err(Error::Split(format!(
            "labeled fraction {labeled_fraction} outside (0, 1)"
        )));
    }
    let n = g.n();
    let size = (labeled_fraction * n as f64).round() as usize;
    if size < g.k() || size >= n {
        return Err(Error::Split(format!(
            "{size} labeled nodes of {n} cannot cover {} classes and leave a test set",
            g.k()
        )));
    }
    let mut rng = rng_from(rng_seed);
    let mut order: Vec<usize> = (0..n).collect();
    for _ in 0..MAX_SPLIT_DRAWS {
        order.shuffle(&mut rng);
        let mut seen = vec![false; g.k()];
        for &v in &order[..size] {
            seen[g.label(v)] = true;
        }
        if seen.iter().all(|&s| s) {
            return Ok(Split {
                labeled: sorted(order[..size].to_vec()),
                unlabeled: sorted(order[size..].to_vec()),
                train: None,
                valid: None,
            });
        }
    }
    Err(Error::Split(format!(
        "no split labels every class after {MAX_SPLIT_DRAWS} draws"
    )))
}

/// Divides the labeled set into train and validation parts uniformly at
/// random, with `round(valid_fraction * |labeled|)` validation nodes.
pub fn subdivide(split: &Split, valid_fraction: f64, rng_seed: u64) -> Result<Split> {
    if split.train.is_some() || split.valid.is_some() {
        return Err(Error::Split("split is already subdivided".into()));
    }
    if !(valid_fraction > 0.0 && valid_fraction < 1.0) {
        return Err(Error::Split(format!(
            "validation fraction {valid_fraction} outside (0, 1)"
        )));
    }
    let m = split.labeled.len();
    let valid_size = (valid_fraction * m as f64).round() as usize;
    if valid_size == 0 || valid_size >= m {
        return Err(Error::Split(format!(
            "{valid_size} validation nodes of {m} labeled leaves an empty part"
        )));
    }
    let mut order = split.labeled.clone();
    order.shuffle(&mut rng_from(rng_seed));
    Ok(Split {
        labeled: split.labeled.clone(),
        unlabeled: split.unlabeled.clone(),
        train: Some(sorted(order[valid_size..].to_vec())),
        valid: Some(sorted(order[..valid_size].to_vec())),
    })
}

/// Fraction of `nodes` whose prediction equals the truth. `predictions`
/// is aligned with `nodes`.
pub fn accuracy(predictions: &[usize], truth: &[usize], nodes: &[usize]) -> Result<f64> {
    if nodes.is_empty() {
        return Err(Error::Domain("accuracy over an empty node set".into()));
    }
    if predictions.len() != nodes.len() {
        return Err(Error::Domain(format!(
            "{} predictions for {} nodes",
            predictions.len(),
            nodes.len()
        )));
    }
    let hits = nodes
        .iter()
        .zip(predictions)
        .filter(|&(&v, &p)| truth[v] == p)
        .count();
    Ok(hits as f64 / nodes.len() as f64)
}
