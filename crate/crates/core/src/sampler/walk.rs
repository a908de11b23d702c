use std::collections::{HashSet, VecDeque};

use rand::seq::index::sample as sample_indices;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::kl::kl_divergence;
use crate::error::{Error, Result};
use crate::graph::{edge_category_index, DiscreteDistribution, Graph};
use crate::seed::Rng;

/// Walk transitions allowed per requested edge before giving up.
pub const STEP_BUDGET_PER_EDGE: u64 = 10_000;

/// A connected subgraph collected by a random walk, in parent coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubgraphSample {
    /// Local index -> parent node, ascending.
    pub parent_ids: Vec<usize>,
    /// Local undirected edges `(a, b)` with `a < b`, ascending.
    pub edges: Vec<(usize, usize)>,
    /// Parent node the walk started from.
    pub seed_node: usize,
    pub walk_steps: u64,
    pub node_kl: f64,
    pub edge_kl: f64,
    /// Walks drawn for this sample, the accepted one included.
    pub attempts: usize,
}

impl SubgraphSample {
    /// Builds a sample from parent-graph edges. KLs are left at zero.
    pub fn from_parent_edges(
        parent_edges: impl IntoIterator<Item = (usize, usize)>,
        seed_node: usize,
        walk_steps: u64,
    ) -> Self {
        let parent_edges: Vec<(usize, usize)> = parent_edges
            .into_iter()
            .map(|(u, v)| (u.min(v), u.max(v)))
            .collect();
        let mut parent_ids: Vec<usize> = parent_edges.iter().flat_map(|&(u, v)| [u, v]).collect();
        parent_ids.sort_unstable();
        parent_ids.dedup();
        let local = |v: usize| parent_ids.binary_search(&v).unwrap();
        let mut edges: Vec<(usize, usize)> = parent_edges
            .iter()
            .map(|&(u, v)| {
                let (a, b) = (local(u), local(v));
                (a.min(b), a.max(b))
            })
            .collect();
        edges.sort_unstable();
        edges.dedup();
        SubgraphSample {
            parent_ids,
            edges,
            seed_node,
            walk_steps,
            node_kl: 0.0,
            edge_kl: 0.0,
            attempts: 1,
        }
    }

    pub fn node_count(&self) -> usize {
        self.parent_ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Node-label distribution over the parent's classes.
    pub fn node_distribution(&self, parent: &Graph) -> Result<DiscreteDistribution> {
        let mut counts = vec![0usize; parent.k()];
        for &v in &self.parent_ids {
            counts[parent.label(v)] += 1;
        }
        DiscreteDistribution::from_counts(&counts)
    }

    /// Edge-category distribution over the parent's `k * k` categories.
    pub fn edge_distribution(&self, parent: &Graph) -> Result<DiscreteDistribution> {
        let k = parent.k();
        let mut counts = vec![0usize; k * k];
        for &(a, b) in &self.edges {
            let (u, v) = (self.parent_ids[a], self.parent_ids[b]);
            counts[edge_category_index(parent.label(u), parent.label(v), k)] += 1;
        }
        DiscreteDistribution::from_counts(&counts)
    }

    /// Fills `node_kl` and `edge_kl` against the parent's distributions.
    pub fn stamp_kl(
        &mut self,
        parent: &Graph,
        parent_nodes: &DiscreteDistribution,
        parent_edges: &DiscreteDistribution,
    ) -> Result<()> {
        self.node_kl = kl_divergence(&self.node_distribution(parent)?, parent_nodes)?;
        self.edge_kl = kl_divergence(&self.edge_distribution(parent)?, parent_edges)?;
        Ok(())
    }

    /// True when every local node is reachable from node 0 over `edges`.
    pub fn is_connected(&self) -> bool {
        connected(self.node_count(), &self.edges)
    }

    /// The sample as a standalone graph with the parent's labels and features.
    pub fn to_graph(&self, parent: &Graph) -> Result<Graph> {
        parent.restrict(&self.parent_ids, &self.edges)
    }
}

pub(crate) fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    if n == 0 {
        return true;
    }
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    let mut reached = 1;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                reached += 1;
                queue.push_back(v);
            }
        }
    }
    reached == n
}

/// Simple random walk from `seed_node` until exactly `target_edges`
/// distinct undirected edges have been traversed. Each step moves to a
/// uniformly random neighbour of the current node.
pub fn random_walk_sample(
    g: &Graph,
    seed_node: usize,
    target_edges: usize,
    rng: &mut Rng,
) -> Result<SubgraphSample> {
    if seed_node >= g.n() {
        return Err(Error::Domain(format!("seed node {seed_node} out of range")));
    }
    if g.degree(seed_node) == 0 {
        return Err(Error::Domain(format!("seed node {seed_node} is isolated")));
    }
    if target_edges == 0 {
        return Err(Error::Domain("target_edges must be at least 1".into()));
    }
    let budget = STEP_BUDGET_PER_EDGE.saturating_mul(target_edges as u64);
    let mut collected: HashSet<(usize, usize)> = HashSet::with_capacity(target_edges);
    let mut current = seed_node;
    let mut steps = 0u64;
    while collected.len() < target_edges {
        if steps >= budget {
            return Err(Error::Exhausted {
                steps,
                collected: collected.len(),
                target: target_edges,
            });
        }
        let nb = g.neighbors(current);
        let next = nb[rng.random_range(0..nb.len())];
        collected.insert((current.min(next), current.max(next)));
        current = next;
        steps += 1;
    }
    Ok(SubgraphSample::from_parent_edges(collected, seed_node, steps))
}

/// Uniformly sampled node set with its induced edges. The result is not
/// necessarily connected.
#[derive(Debug, Clone, PartialEq)]
pub struct InducedSample {
    pub parent_ids: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
}

impl InducedSample {
    pub fn is_connected(&self) -> bool {
        connected(self.parent_ids.len(), &self.edges)
    }

    pub fn node_distribution(&self, parent: &Graph) -> Result<DiscreteDistribution> {
        let mut counts = vec![0usize; parent.k()];
        for &v in &self.parent_ids {
            counts[parent.label(v)] += 1;
        }
        DiscreteDistribution::from_counts(&counts)
    }
}

pub fn vertex_sample(g: &Graph, node_count: usize, rng: &mut Rng) -> Result<InducedSample> {
    if node_count > g.n() {
        return Err(Error::Domain(format!(
            "cannot sample {node_count} nodes from a graph of {}",
            g.n()
        )));
    }
    let mut parent_ids = sample_indices(rng, g.n(), node_count).into_vec();
    parent_ids.sort_unstable();
    let mut edges = Vec::new();
    for (a, &u) in parent_ids.iter().enumerate() {
        for &v in g.neighbors(u) {
            if v > u {
                if let Ok(b) = parent_ids.binary_search(&v) {
                    edges.push((a, b));
                }
            }
        }
    }
    Ok(InducedSample { parent_ids, edges })
}
