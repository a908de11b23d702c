//! Propagated-features linear classifier.
//!
//! Features are smoothed with `S = D^{-1/2} (A + 2I) D^{-1/2}`, where `D` is
//! the degree matrix of `A + 2I`, applied `depth` times. A multinomial
//! logistic regression is then trained on the propagated rows of the
//! training nodes by full-batch gradient descent from zero weights.
//!
//! Hyper-parameters: `depth` (default 2), `lr` (0.2), `epochs` (200),
//! `l2` (5e-4) and `dropout` (0), the last applied entry-wise to the
//! propagated training rows at every epoch.

use rand::Rng as _;

use super::guard::GraphView;
use super::hyper::HyperParams;
use super::model::{FittedModel, NodeClassifier};
use crate::error::{Error, Result};
use crate::seed::rng_from;

/// Weight of the self-loop added to every node before normalisation.
pub const SELF_LOOP_WEIGHT: f64 = 2.0;

#[derive(Debug, Clone, Copy, Default)]
pub struct PropLin;

#[derive(Debug, Clone, PartialEq)]
struct Settings {
    depth: usize,
    lr: f64,
    epochs: usize,
    l2: f64,
    dropout: f64,
}

impl Settings {
    fn from_params(p: &HyperParams) -> Result<Self> {
        let s = Settings {
            depth: p.usize_or("depth", 2)?,
            lr: p.f64_or("lr", 0.2)?,
            epochs: p.usize_or("epochs", 200)?,
            l2: p.f64_or("l2", 5e-4)?,
            dropout: p.f64_or("dropout", 0.0)?,
        };
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(s.lr > 0.0) || !(s.l2 >= 0.0) || !(0.0..1.0).contains(&s.dropout) {
            return Err(Error::Model(format!("invalid PropLin settings {s:?}")));
        }
        Ok(s)
    }
}

/// Dense row-major `n x dim` feature matrix of the view.
fn dense_features(view: &GraphView<'_>) -> Vec<f64> {
    let dim = view.feature_dim();
    let mut x = vec![0.0; view.n() * dim];
    for v in 0..view.n() {
        for (d, value) in view.features().row(v) {
            x[v * dim + d] = value;
        }
    }
    x
}

/// `S^depth X` with the self-loop-reinforced normalised adjacency.
pub fn propagate(view: &GraphView<'_>, depth: usize) -> Vec<f64> {
    let n = view.n();
    let dim = view.feature_dim();
    let inv_sqrt: Vec<f64> = (0..n)
        .map(|v| 1.0 / (view.degree(v) as f64 + SELF_LOOP_WEIGHT).sqrt())
        .collect();
    let mut x = dense_features(view);
    for _ in 0..depth {
        let mut next = vec![0.0; n * dim];
        for v in 0..n {
            let out = &mut next[v * dim..(v + 1) * dim];
            let self_w = SELF_LOOP_WEIGHT * inv_sqrt[v] * inv_sqrt[v];
            for (o, xi) in out.iter_mut().zip(&x[v * dim..(v + 1) * dim]) {
                *o = self_w * xi;
            }
            for &u in view.neighbors(v) {
                let w = inv_sqrt[v] * inv_sqrt[u];
                for (o, xi) in out.iter_mut().zip(&x[u * dim..(u + 1) * dim]) {
                    *o += w * xi;
                }
            }
        }
        x = next;
    }
    x
}

struct Linear {
    dim: usize,
    k: usize,
    /// Row-major `dim x k`.
    weights: Vec<f64>,
    bias: Vec<f64>,
}

impl Linear {
    fn scores(&self, row: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.bias);
        for (d, &x) in row.iter().enumerate() {
            if x != 0.0 {
                let w = &self.weights[d * self.k..(d + 1) * self.k];
                for (o, wc) in out.iter_mut().zip(w) {
                    *o += x * wc;
                }
            }
        }
    }

    fn argmax(&self, row: &[f64], buf: &mut [f64]) -> usize {
        self.scores(row, buf);
        let mut best = 0;
        for c in 1..self.k {
            if buf[c] > buf[best] {
                best = c;
            }
        }
        best
    }
}

fn train_linear(
    rows: &[f64],
    labels: &[usize],
    dim: usize,
    k: usize,
    s: &Settings,
    seed: u64,
) -> Linear {
    let m = labels.len();
    let mut model = Linear {
        dim,
        k,
        weights: vec![0.0; dim * k],
        bias: vec![0.0; k],
    };
    let mut rng = rng_from(seed);
    let keep = 1.0 - s.dropout;
    let mut dropped = rows.to_vec();
    let mut probs = vec![0.0; k];
    let mut grad_w = vec![0.0; dim * k];
    let mut grad_b = vec![0.0; k];
    for _ in 0..s.epochs {
        let x: &[f64] = if s.dropout > 0.0 {
            for (dst, &src) in dropped.iter_mut().zip(rows) {
                *dst = if rng.random::<f64>() < keep { src / keep } else { 0.0 };
            }
            &dropped
        } else {
            rows
        };
        grad_w.iter_mut().for_each(|g| *g = 0.0);
        grad_b.iter_mut().for_each(|g| *g = 0.0);
        for (i, &y) in labels.iter().enumerate() {
            let row = &x[i * dim..(i + 1) * dim];
            model.scores(row, &mut probs);
            let max = probs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut total = 0.0;
            for p in probs.iter_mut() {
                *p = (*p - max).exp();
                total += *p;
            }
            for (c, p) in probs.iter_mut().enumerate() {
                *p /= total;
                if c == y {
                    *p -= 1.0;
                }
                *p /= m as f64;
            }
            for (d, &xd) in row.iter().enumerate() {
                if xd != 0.0 {
                    let g = &mut grad_w[d * k..(d + 1) * k];
                    for (gc, pc) in g.iter_mut().zip(&probs) {
                        *gc += xd * pc;
                    }
                }
            }
            for (gb, pc) in grad_b.iter_mut().zip(&probs) {
                *gb += pc;
            }
        }
        for (w, g) in model.weights.iter_mut().zip(&grad_w) {
            *w -= s.lr * (g + s.l2 * *w);
        }
        for (b, g) in model.bias.iter_mut().zip(&grad_b) {
            *b -= s.lr * g;
        }
    }
    model
}

struct FittedPropLin {
    propagated: Vec<f64>,
    linear: Linear,
}

impl FittedModel for FittedPropLin {
    fn predict(&self, nodes: &[usize]) -> Vec<usize> {
        let dim = self.linear.dim;
        let mut buf = vec![0.0; self.linear.k];
        nodes
            .iter()
            .map(|&v| self.linear.argmax(&self.propagated[v * dim..(v + 1) * dim], &mut buf))
            .collect()
    }
}

impl NodeClassifier for PropLin {
    fn name(&self) -> &str {
        "proplin"
    }

    fn fit(
        &self,
        view: &GraphView<'_>,
        train: &[(usize, usize)],
        params: &HyperParams,
        seed: u64,
    ) -> Result<Box<dyn FittedModel>> {
        let settings = Settings::from_params(params)?;
        let dim = view.feature_dim();
        if dim == 0 {
            return Err(Error::Model("PropLin needs node features".into()));
        }
        if train.is_empty() {
            return Err(Error::Model("empty training set".into()));
        }
        let k = view.k();
        let propagated = propagate(view, settings.depth);
        let mut rows = Vec::with_capacity(train.len() * dim);
        let mut labels = Vec::with_capacity(train.len());
        for &(v, y) in train {
            if y >= k {
                return Err(Error::Model(format!("training label {y} outside [0, {k})")));
            }
            rows.extend_from_slice(&propagated[v * dim..(v + 1) * dim]);
            labels.push(y);
        }
        let linear = train_linear(&rows, &labels, dim, k, &settings, seed);
        Ok(Box::new(FittedPropLin { propagated, linear }))
    }
}
