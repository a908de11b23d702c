use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use super::{Graph, SparseFeatures};
use crate::error::{Error, Result};
use crate::seed::{derived_rng, stream};

/// Stochastic block model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SbmParams {
    pub block_sizes: Vec<usize>,
    pub p_in: f64,
    pub p_out: f64,
    pub feature_dim: usize,
    /// Value of the block-indicator coordinate.
    pub feature_signal: f64,
    /// Standard deviation of Gaussian noise added to the indicator
    /// coordinates. Zero keeps the classes linearly separable.
    pub indicator_noise: f64,
    pub seed: u64,
}

/// Stochastic block model with one-hot block features.
///
/// Node `v` in block `b` gets `feature_signal` at coordinate `b`, zero at the
/// other indicator coordinates, and standard normal noise in coordinates
/// `blocks..feature_dim`.
pub fn generate_sbm(
    block_sizes: &[usize],
    p_in: f64,
    p_out: f64,
    feature_dim: usize,
    feature_signal: f64,
    rng_seed: u64,
) -> Result<Graph> {
    generate_sbm_with(&SbmParams {
        block_sizes: block_sizes.to_vec(),
        p_in,
        p_out,
        feature_dim,
        feature_signal,
        indicator_noise: 0.0,
        seed: rng_seed,
    })
}

pub fn generate_sbm_with(params: &SbmParams) -> Result<Graph> {
    let blocks = params.block_sizes.len();
    if blocks == 0 {
        return Err(Error::Domain("block_sizes must be nonempty".into()));
    }
    if !(0.0 <= params.p_out && params.p_out <= params.p_in && params.p_in <= 1.0) {
        return Err(Error::Domain(format!(
            "need 0 <= p_out <= p_in <= 1, got p_in={} p_out={}",
            params.p_in, params.p_out
        )));
    }
    if params.feature_dim < blocks {
        return Err(Error::Domain(format!(
            "feature_dim {} is smaller than the block count {blocks}",
            params.feature_dim
        )));
    }
    if let Some(b) = params.block_sizes.iter().position(|&s| s == 0) {
        return Err(Error::Generation(format!("block {b} is empty")));
    }

    let labels: Vec<usize> = params
        .block_sizes
        .iter()
        .enumerate()
        .flat_map(|(b, &size)| std::iter::repeat_n(b, size))
        .collect();
    let n = labels.len();

    let mut rng = derived_rng(params.seed, stream::SBM_EDGES, 0);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let p = if labels[u] == labels[v] {
                params.p_in
            } else {
                params.p_out
            };
            if p > 0.0 && rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }

    let mut rng = derived_rng(params.seed, stream::SBM_FEATURES, 0);
    let rows = labels
        .iter()
        .map(|&b| {
            let mut row = Vec::with_capacity(params.feature_dim);
            for d in 0..params.feature_dim {
                let noise: f64 = StandardNormal.sample(&mut rng);
                let value = if d < blocks {
                    let base = if d == b { params.feature_signal } else { 0.0 };
                    base + params.indicator_noise * noise
                } else {
                    noise
                };
                row.push((d, value));
            }
            row
        })
        .collect();
    let features = SparseFeatures::from_rows(params.feature_dim, rows);

    let (g, _) = Graph::from_edges(&edges, labels, features)?;
    Ok(g.with_name(format!("sbm-{}", params.seed)))
}
