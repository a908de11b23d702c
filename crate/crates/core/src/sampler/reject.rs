use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::walk::{random_walk_sample, SubgraphSample};
use crate::error::{Error, Result};
use crate::graph::{edge_category_distribution, node_label_distribution, Graph};
use crate::seed::{derive_seed, derived_rng, stream};
use crate::summary::percentile;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub target_edges: usize,
    #[serde(with = "crate::sampler::threshold_serde")]
    pub node_kl_threshold: f64,
    #[serde(with = "crate::sampler::threshold_serde")]
    pub edge_kl_threshold: f64,
    pub sample_count: usize,
    pub max_attempts_per_sample: usize,
    pub rng_seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            target_edges: 5_000,
            node_kl_threshold: f64::INFINITY,
            edge_kl_threshold: f64::INFINITY,
            sample_count: 100,
            max_attempts_per_sample: 1_000,
            rng_seed: 0,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.target_edges == 0 || self.sample_count == 0 || self.max_attempts_per_sample == 0 {
            return Err(Error::Domain(
                "target_edges, sample_count and max_attempts_per_sample must be >= 1".into(),
            ));
        }
        for t in [self.node_kl_threshold, self.edge_kl_threshold] {
            if t.is_nan() || t < 0.0 {
                return Err(Error::Domain(format!("invalid KL threshold {t}")));
            }
        }
        Ok(())
    }

    pub fn accepts(&self, sample: &SubgraphSample) -> bool {
        sample.node_kl <= self.node_kl_threshold && sample.edge_kl <= self.edge_kl_threshold
    }

    /// Seed of the RNG stream owned by sample slot `slot`.
    pub fn slot_seed(&self, slot: usize) -> u64 {
        derive_seed(self.rng_seed, stream::SAMPLE_SLOT, slot as u64)
    }
}

/// Positive-degree nodes whose connected component holds at least
/// `target_edges` edges.
fn eligible_seeds(g: &Graph, target_edges: usize) -> Vec<usize> {
    let n = g.n();
    let mut component = vec![usize::MAX; n];
    let mut component_edges = Vec::new();
    for start in 0..n {
        if component[start] != usize::MAX {
            continue;
        }
        let id = component_edges.len();
        let mut degree_sum = 0;
        let mut stack = vec![start];
        component[start] = id;
        while let Some(u) = stack.pop() {
            degree_sum += g.degree(u);
            for &v in g.neighbors(u) {
                if component[v] == usize::MAX {
                    component[v] = id;
                    stack.push(v);
                }
            }
        }
        component_edges.push(degree_sum / 2);
    }
    (0..n)
        .filter(|&v| g.degree(v) > 0 && component_edges[component[v]] >= target_edges)
        .collect()
}

/// Draws `cfg.sample_count` random-walk samples, each accepted only when
/// both its node-label KL and edge-category KL to the parent are within
/// the configured thresholds.
///
/// Slot `i` owns the RNG stream `cfg.slot_seed(i)` and keeps drawing walks
/// from uniformly chosen seed nodes until one is accepted or
/// `max_attempts_per_sample` walks have been rejected. Slots run in
/// parallel; the result is ordered by slot and does not depend on the
/// number of worker threads.
pub fn reject_sample(g: &Graph, cfg: &SamplerConfig) -> Result<Vec<SubgraphSample>> {
    cfg.validate()?;
    let parent_nodes = node_label_distribution(g)?;
    let parent_edges = edge_category_distribution(g)?;
    let seeds = eligible_seeds(g, cfg.target_edges);
    if seeds.is_empty() {
        return Err(Error::Domain(format!(
            "no connected component has {} edges",
            cfg.target_edges
        )));
    }

    (0..cfg.sample_count)
        .into_par_iter()
        .map(|slot| {
            let mut rng = derived_rng(cfg.rng_seed, stream::SAMPLE_SLOT, slot as u64);
            let mut best_node = f64::INFINITY;
            let mut best_edge = f64::INFINITY;
            for attempt in 1..=cfg.max_attempts_per_sample {
                let seed_node = seeds[rng.random_range(0..seeds.len())];
                let mut sample = random_walk_sample(g, seed_node, cfg.target_edges, &mut rng)?;
                sample.stamp_kl(g, &parent_nodes, &parent_edges)?;
                if cfg.accepts(&sample) {
                    sample.attempts = attempt;
                    return Ok(sample);
                }
                best_node = best_node.min(sample.node_kl);
                best_edge = best_edge.min(sample.edge_kl);
            }
            Err(Error::ThresholdInfeasible {
                slot,
                attempts: cfg.max_attempts_per_sample,
                best_node_kl: best_node,
                best_edge_kl: best_edge,
            })
        })
        .collect()
}

/// Thresholds derived from an unthresholded pilot run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub percentile: f64,
    pub node_threshold: f64,
    pub edge_threshold: f64,
    pub pilot_seed: u64,
    pub pilot_node_kl: Vec<f64>,
    pub pilot_edge_kl: Vec<f64>,
    /// Fraction of pilot samples within both thresholds at once.
    pub joint_acceptance_rate: f64,
}

/// Runs `pilot_count` unthresholded walks and returns the given percentile
/// of their node and edge KLs as thresholds.
pub fn calibrate_thresholds(
    g: &Graph,
    cfg: &SamplerConfig,
    pilot_count: usize,
    pct: f64,
) -> Result<Calibration> {
    if pilot_count < 10 {
        return Err(Error::Domain("pilot_count must be at least 10".into()));
    }
    if !(pct > 0.0 && pct <= 100.0) {
        return Err(Error::Domain(format!("percentile {pct} outside (0, 100]")));
    }
    let pilot_seed = derive_seed(cfg.rng_seed, stream::PILOT, 0);
    let pilot_cfg = SamplerConfig {
        node_kl_threshold: f64::INFINITY,
        edge_kl_threshold: f64::INFINITY,
        sample_count: pilot_count,
        rng_seed: pilot_seed,
        ..cfg.clone()
    };
    let pilot = reject_sample(g, &pilot_cfg)?;
    let node: Vec<f64> = pilot.iter().map(|s| s.node_kl).collect();
    let edge: Vec<f64> = pilot.iter().map(|s| s.edge_kl).collect();
    let node_threshold = percentile(&node, pct);
    let edge_threshold = percentile(&edge, pct);
    let joint = pilot
        .iter()
        .filter(|s| s.node_kl <= node_threshold && s.edge_kl <= edge_threshold)
        .count();
    Ok(Calibration {
        percentile: pct,
        node_threshold,
        edge_threshold,
        pilot_seed,
        pilot_node_kl: node,
        pilot_edge_kl: edge,
        joint_acceptance_rate: joint as f64 / pilot_count as f64,
    })
}
