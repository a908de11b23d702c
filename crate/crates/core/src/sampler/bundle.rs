//! Sample families on disk: one graph bundle per sample (`sample_000/`, ...)
//! with a `provenance.json` next to the bundle files. Node ids in sample
//! bundles are the parent graph's external ids.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::walk::SubgraphSample;
use crate::error::{Error, Result};
use crate::graph::{
    edge_category_distribution, load_bundle, node_label_distribution, write_bundle, Graph,
};
use crate::jsonio::{read_json, write_json};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub slot: usize,
    /// External id of the walk's start node in the parent graph.
    pub seed_node: u64,
    pub walk_steps: u64,
    pub node_kl: f64,
    pub edge_kl: f64,
    pub attempts: usize,
    /// Master sampler seed; the slot stream is derived from it and `slot`.
    pub rng_seed: u64,
    pub slot_seed: u64,
}

pub fn sample_dir_name(slot: usize) -> String {
    format!("sample_{slot:03}")
}

/// Writes every sample under `dir` and returns the bundle paths.
pub fn write_samples(
    dir: &Path,
    samples: &[SubgraphSample],
    parent: &Graph,
    rng_seed: u64,
    slot_seed: impl Fn(usize) -> u64,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths = Vec::with_capacity(samples.len());
    for (slot, s) in samples.iter().enumerate() {
        let name = sample_dir_name(slot);
        let path = dir.join(&name);
        let graph = s.to_graph(parent)?.with_name(format!("{}/{name}", parent.name()));
        write_bundle(&graph, &path)?;
        let provenance = Provenance {
            slot,
            seed_node: parent.original_ids()[s.seed_node],
            walk_steps: s.walk_steps,
            node_kl: s.node_kl,
            edge_kl: s.edge_kl,
            attempts: s.attempts,
            rng_seed,
            slot_seed: slot_seed(slot),
        };
        write_json(&path.join("provenance.json"), &provenance)?;
        paths.push(path);
    }
    Ok(paths)
}

/// Sample bundle directories under `dir`, sorted by name.
pub fn sample_dirs(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut dirs = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        let is_sample = path
            .file_name()
            .and_then(|n| n.to_str())
            .is_some_and(|n| n.starts_with("sample_"));
        if is_sample && path.join("meta.json").exists() {
            dirs.push(path);
        }
    }
    dirs.sort();
    Ok(dirs)
}

/// Loads every sample bundle under `dir` as a standalone graph.
pub fn load_sample_graphs(dir: &Path) -> Result<Vec<Graph>> {
    sample_dirs(dir)?
        .iter()
        .map(|p| load_bundle(p).map(|(g, _)| g))
        .collect()
}

/// Reads a sample family back into parent coordinates. KLs are recomputed
/// from the structure; walk metadata comes from `provenance.json` when
/// present.
pub fn read_samples(dir: &Path, parent: &Graph) -> Result<Vec<SubgraphSample>> {
    let parent_nodes = node_label_distribution(parent)?;
    let parent_edges = edge_category_distribution(parent)?;
    let to_parent = |id: u64| {
        parent
            .original_ids()
            .binary_search(&id)
            .map_err(|_| Error::Integrity(format!("sample node {id} is not in the parent graph")))
    };
    let mut out = Vec::new();
    for path in sample_dirs(dir)? {
        let (g, _) = load_bundle(&path)?;
        let ids = g.original_ids();
        let mut parent_edges_list = Vec::with_capacity(g.edge_count());
        for (a, b) in g.edges() {
            let (u, v) = (to_parent(ids[a])?, to_parent(ids[b])?);
            if !parent.has_edge(u, v) {
                return Err(Error::Integrity(format!(
                    "{}: edge ({}, {}) is not in the parent graph",
                    path.display(),
                    ids[a],
                    ids[b]
                )));
            }
            parent_edges_list.push((u, v));
        }
        let prov_path = path.join("provenance.json");
        let (seed_node, walk_steps, attempts) = if prov_path.exists() {
            let p: Provenance = read_json(&prov_path)?;
            (to_parent(p.seed_node)?, p.walk_steps, p.attempts)
        } else {
            (to_parent(ids[0])?, 0, 1)
        };
        let mut sample = SubgraphSample::from_parent_edges(parent_edges_list, seed_node, walk_steps);
        if sample.node_count() != g.n() {
            return Err(Error::Integrity(format!(
                "{}: sample has nodes outside its edge set",
                path.display()
            )));
        }
        sample.attempts = attempts;
        sample.stamp_kl(parent, &parent_nodes, &parent_edges)?;
        out.push(sample);
    }
    Ok(out)
}
