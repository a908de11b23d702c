//! Immutable undirected graph with node labels and sparse node features.
//!
//! Adjacency is stored in compressed row form with every neighbour list
//! sorted ascending. Node ids are dense in `[0, n)`; the ids found in input
//! files are kept in `original_ids` and written back out by the bundle
//! writer. Labels are dense in `[0, k)` with every class populated.

mod distribution;
mod generate;
mod io;

pub use distribution::{
    edge_category_distribution, edge_category_index, node_label_distribution, DiscreteDistribution,
};
pub use generate::{generate_sbm, generate_sbm_with, SbmParams};
pub use io::{load_bundle, load_graph, write_bundle, write_graph, BundleMeta, LoadReport};

use crate::error::{Error, Result};

/// Per-node sparse feature rows of a fixed dimension.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseFeatures {
    dim: usize,
    offsets: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseFeatures {
    /// Zero-dimensional features for `n` nodes.
    pub fn empty(n: usize) -> Self {
        SparseFeatures {
            dim: 0,
            offsets: vec![0; n + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Builds rows from `(node, dim, value)` triplets. Zero values are
    /// dropped; repeated `(node, dim)` entries keep the last value.
    pub fn from_triplets(n: usize, dim: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(node, d, v) in triplets {
            if node >= n {
                return Err(Error::Integrity(format!("feature row for unknown node {node}")));
            }
            if d >= dim {
                return Err(Error::Integrity(format!(
                    "feature index {d} out of range for dimension {dim}"
                )));
            }
            rows[node].push((d, v));
        }
        Ok(Self::from_rows(dim, rows))
    }

    pub(crate) fn from_rows(dim: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let mut offsets = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        offsets.push(0);
        for mut row in rows {
            row.sort_by_key(|&(d, _)| d);
            let mut i = 0;
            while i < row.len() {
                let mut j = i;
                while j + 1 < row.len() && row[j + 1].0 == row[i].0 {
                    j += 1;
                }
                let (d, v) = row[j];
                if v != 0.0 {
                    indices.push(d);
                    values.push(v);
                }
                i = j + 1;
            }
            offsets.push(indices.len());
        }
        SparseFeatures {
            dim,
            offsets,
            indices,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `(index, value)` pairs of one row, ascending by index.
    pub fn row(&self, node: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.offsets[node]..self.offsets[node + 1];
        self.indices[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    fn select(&self, nodes: &[usize]) -> Self {
        let rows = nodes.iter().map(|&v| self.row(v).collect()).collect();
        Self::from_rows(self.dim, rows)
    }

    /// Keeps the `keep` dimensions that are nonzero in the most rows (ties
    /// toward the lower index) and renumbers them in ascending original order.
    pub fn truncate(&self, keep: usize) -> Self {
        if keep >= self.dim {
            return self.clone();
        }
        let mut row_count = vec![0usize; self.dim];
        for &d in &self.indices {
            row_count[d] += 1;
        }
        let mut dims: Vec<usize> = (0..self.dim).collect();
        dims.sort_by(|&a, &b| row_count[b].cmp(&row_count[a]).then(a.cmp(&b)));
        let mut kept = dims[..keep].to_vec();
        kept.sort_unstable();
        let mut remap = vec![usize::MAX; self.dim];
        for (new, &old) in kept.iter().enumerate() {
            remap[old] = new;
        }
        let n = self.offsets.len() - 1;
        let rows = (0..n)
            .map(|v| {
                self.row(v)
                    .filter(|&(d, _)| remap[d] != usize::MAX)
                    .map(|(d, x)| (remap[d], x))
                    .collect()
            })
            .collect();
        Self::from_rows(keep, rows)
    }
}

/// Counts of input edges discarded while building a simple graph.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct BuildReport {
    pub dropped_duplicates: usize,
    pub dropped_self_loops: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    name: String,
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    labels: Vec<usize>,
    k: usize,
    features: SparseFeatures,
    original_ids: Vec<u64>,
    label_values: Vec<i64>,
}

impl Graph {
    /// Builds a simple undirected graph over nodes `0..labels.len()`.
    ///
    /// Self-loops and repeated edges (in either orientation) are dropped and
    /// counted. Labels must already be dense with every class in `[0, k)`
    /// populated, where `k = max label + 1`.
    pub fn from_edges(
        edges: &[(usize, usize)],
        labels: Vec<usize>,
        features: SparseFeatures,
    ) -> Result<(Graph, BuildReport)> {
        let n = labels.len();
        let k = labels.iter().max().map_or(0, |&m| m + 1);
        let mut present = vec![false; k];
        for &y in &labels {
            present[y] = true;
        }
        if let Some(c) = present.iter().position(|&p| !p) {
            return Err(Error::Integrity(format!("class {c} has no nodes")));
        }
        if features.offsets.len() != n + 1 {
            return Err(Error::Integrity(format!(
                "feature rows ({}) do not match node count ({n})",
                features.offsets.len() - 1
            )));
        }

        let mut report = BuildReport::default();
        let mut canon = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Integrity(format!("edge ({u}, {v}) references unknown node")));
            }
            if u == v {
                report.dropped_self_loops += 1;
                continue;
            }
            canon.push((u.min(v), u.max(v)));
        }
        let before = canon.len();
        canon.sort_unstable();
        canon.dedup();
        report.dropped_duplicates = before - canon.len();

        let mut degree = vec![0usize; n];
        for &(u, v) in &canon {
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut cursor = offsets.clone();
        let mut neighbors = vec![0usize; offsets[n]];
        for &(u, v) in &canon {
            neighbors[cursor[u]] = v;
            cursor[u] += 1;
            neighbors[cursor[v]] = u;
            cursor[v] += 1;
        }
        for v in 0..n {
            neighbors[offsets[v]..offsets[v + 1]].sort_unstable();
        }

        let graph = Graph {
            name: String::new(),
            offsets,
            neighbors,
            labels,
            k,
            features,
            original_ids: (0..n as u64).collect(),
            label_values: (0..k as i64).collect(),
        };
        Ok((graph, report))
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Replaces the external node ids written by the bundle writer. Ids must
    /// be strictly increasing so that node order stays canonical.
    pub fn with_original_ids(mut self, ids: Vec<u64>) -> Result<Self> {
        if ids.len() != self.n() {
            return Err(Error::Integrity("original id count does not match n".into()));
        }
        if ids.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Integrity("original ids must be strictly increasing".into()));
        }
        self.original_ids = ids;
        Ok(self)
    }

    /// Replaces the external label values; `values[c]` is the value of class `c`.
    pub fn with_label_values(mut self, values: Vec<i64>) -> Result<Self> {
        if values.len() != self.k {
            return Err(Error::Integrity("label value count does not match k".into()));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Integrity("label values must be strictly increasing".into()));
        }
        self.label_values = values;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n()).map(|v| self.degree(v)).collect()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Undirected edges as `(u, v)` with `u < v`, ascending.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    pub fn label(&self, v: usize) -> usize {
        self.labels[v]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn features(&self) -> &SparseFeatures {
        &self.features
    }

    pub fn feature_dim(&self) -> usize {
        self.features.dim
    }

    pub fn original_ids(&self) -> &[u64] {
        &self.original_ids
    }

    pub fn label_values(&self) -> &[i64] {
        &self.label_values
    }

    /// Same graph with features reduced to the `keep` most common dimensions
    /// by nonzero-row count.
    pub fn truncate_features(&self, keep: usize) -> Graph {
        let mut g = self.clone();
        g.features = self.features.truncate(keep);
        g
    }

    /// Graph on `nodes` (parent ids, ascending, no duplicates) carrying the
    /// given local edge list. Labels are re-densified so that k stays tight;
    /// external ids and label values are inherited from the parent.
    pub fn restrict(&self, nodes: &[usize], local_edges: &[(usize, usize)]) -> Result<Graph> {
        let mut present: Vec<usize> = nodes.iter().map(|&v| self.labels[v]).collect();
        present.sort_unstable();
        present.dedup();
        let mut relabel = vec![usize::MAX; self.k];
        for (new, &old) in present.iter().enumerate() {
            relabel[old] = new;
        }
        let labels = nodes.iter().map(|&v| relabel[self.labels[v]]).collect();
        let (g, _) = Graph::from_edges(local_edges, labels, self.features.select(nodes))?;
        g.with_original_ids(nodes.iter().map(|&v| self.original_ids[v]).collect())?
            .with_label_values(present.iter().map(|&c| self.label_values[c]).collect())
    }

    /// Full scan of the structural invariants; used by tests and loaders.
    pub fn check_invariants(&self) -> Result<()> {
        let n = self.n();
        for u in 0..n {
            let nb = self.neighbors(u);
            for w in nb.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::Integrity(format!("neighbours of {u} not strictly sorted")));
                }
            }
            for &v in nb {
                if v == u {
                    return Err(Error::Integrity(format!("self-loop at {u}")));
                }
                if v >= n || !self.has_edge(v, u) {
                    return Err(Error::Integrity(format!("edge ({u}, {v}) is not symmetric")));
                }
            }
        }
        let mut seen = vec![false; self.k];
        for &y in &self.labels {
            if y >= self.k {
                return Err(Error::Integrity(format!("label {y} outside [0, {})", self.k)));
            }
            seen[y] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Integrity("k is not tight".into()));
        }
        Ok(())
    }
}
