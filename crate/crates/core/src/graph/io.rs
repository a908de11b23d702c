//! Tab-separated graph files and bundle directories.
//!
//! * edges: `u<TAB>v` per line
//! * labels: `node<TAB>label` per line
//! * features: `node<TAB>dim<TAB>value` per line
//!
//! Blank lines and lines starting with `#` are skipped. A bundle directory
//! holds `edges.tsv`, `labels.tsv`, an optional `features.tsv` and
//! `meta.json`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{BuildReport, Graph, SparseFeatures};
use crate::error::{Error, Result};

pub type LoadReport = BuildReport;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleMeta {
    pub name: String,
    pub n: usize,
    pub k: usize,
    pub d: usize,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn records<'a>(text: &'a str) -> impl Iterator<Item = (usize, Vec<&'a str>)> + 'a {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            None
        } else {
            Some((i + 1, line.split_whitespace().collect()))
        }
    })
}

fn field<T: FromStr>(path: &Path, line: usize, fields: &[&str], idx: usize, what: &str) -> Result<T> {
    fields[idx].parse().map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        line,
        message: format!("invalid {what} {:?}", fields[idx]),
    })
}

fn expect_arity(path: &Path, line: usize, fields: &[&str], arity: usize) -> Result<()> {
    if fields.len() != arity {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("expected {arity} fields, found {}", fields.len()),
        });
    }
    Ok(())
}

/// Loads a graph from separate files.
///
/// The node set is the set of ids in the label file, remapped to `[0, n)`
/// in ascending id order; labels are densified in ascending value order.
/// Self-loops and duplicate edges are dropped and counted in the report.
pub fn load_graph(
    edge_path: &Path,
    label_path: &Path,
    feature_path: Option<&Path>,
) -> Result<(Graph, LoadReport)> {
    load_with_dim(edge_path, label_path, feature_path, None)
}

fn load_with_dim(
    edge_path: &Path,
    label_path: &Path,
    feature_path: Option<&Path>,
    declared_dim: Option<usize>,
) -> Result<(Graph, LoadReport)> {
    let mut raw_labels: BTreeMap<u64, i64> = BTreeMap::new();
    let text = read(label_path)?;
    for (line, fields) in records(&text) {
        expect_arity(label_path, line, &fields, 2)?;
        let node: u64 = field(label_path, line, &fields, 0, "node id")?;
        let label: i64 = field(label_path, line, &fields, 1, "label")?;
        if let Some(prev) = raw_labels.insert(node, label) {
            if prev != label {
                return Err(Error::Integrity(format!(
                    "node {node} has conflicting labels {prev} and {label}"
                )));
            }
        }
    }

    let original_ids: Vec<u64> = raw_labels.keys().copied().collect();
    let mut label_values: Vec<i64> = raw_labels.values().copied().collect();
    label_values.sort_unstable();
    label_values.dedup();
    let dense = |id: u64| original_ids.binary_search(&id).ok();
    let labels: Vec<usize> = raw_labels
        .values()
        .map(|y| label_values.binary_search(y).unwrap())
        .collect();

    let text = read(edge_path)?;
    let mut edges = Vec::new();
    for (line, fields) in records(&text) {
        expect_arity(edge_path, line, &fields, 2)?;
        let u: u64 = field(edge_path, line, &fields, 0, "node id")?;
        let v: u64 = field(edge_path, line, &fields, 1, "node id")?;
        let (Some(du), Some(dv)) = (dense(u), dense(v)) else {
            let missing = if dense(u).is_none() { u } else { v };
            return Err(Error::Integrity(format!(
                "{}:{line}: edge endpoint {missing} has no label",
                edge_path.display()
            )));
        };
        edges.push((du, dv));
    }

    let n = original_ids.len();
    let features = match feature_path {
        None => match declared_dim {
            Some(d) => SparseFeatures::from_rows(d, vec![Vec::new(); n]),
            None => SparseFeatures::empty(n),
        },
        Some(path) => {
            let text = read(path)?;
            let mut triplets = Vec::new();
            let mut max_dim = 0;
            for (line, fields) in records(&text) {
                expect_arity(path, line, &fields, 3)?;
                let node: u64 = field(path, line, &fields, 0, "node id")?;
                let dim: usize = field(path, line, &fields, 1, "feature index")?;
                let value: f64 = field(path, line, &fields, 2, "feature value")?;
                let Some(dn) = dense(node) else {
                    return Err(Error::Integrity(format!(
                        "{}:{line}: features for unknown node {node}",
                        path.display()
                    )));
                };
                max_dim = max_dim.max(dim + 1);
                triplets.push((dn, dim, value));
            }
            let dim = declared_dim.unwrap_or(max_dim).max(max_dim);
            SparseFeatures::from_triplets(n, dim, &triplets)?
        }
    };

    let (g, report) = Graph::from_edges(&edges, labels, features)?;
    let g = g
        .with_original_ids(original_ids)?
        .with_label_values(label_values)?;
    Ok((g, report))
}

/// Writes the graph as three files using its original ids and label values.
/// The feature file is skipped when `feature_path` is `None`.
pub fn write_graph(
    g: &Graph,
    edge_path: &Path,
    label_path: &Path,
    feature_path: Option<&Path>,
) -> Result<()> {
    let ids = g.original_ids();
    let mut out = String::new();
    for (u, v) in g.edges() {
        let _ = writeln!(out, "{}\t{}", ids[u], ids[v]);
    }
    fs::write(edge_path, out).map_err(|e| Error::io(edge_path, e))?;

    let mut out = String::new();
    for (v, id) in ids.iter().enumerate() {
        let _ = writeln!(out, "{id}\t{}", g.label_values()[g.label(v)]);
    }
    fs::write(label_path, out).map_err(|e| Error::io(label_path, e))?;

    if let Some(path) = feature_path {
        let mut out = String::new();
        for (v, id) in ids.iter().enumerate() {
            for (d, x) in g.features().row(v) {
                let _ = writeln!(out, "{id}\t{d}\t{x}");
            }
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

struct BundlePaths {
    edges: PathBuf,
    labels: PathBuf,
    features: PathBuf,
    meta: PathBuf,
}

fn bundle_paths(dir: &Path) -> BundlePaths {
    BundlePaths {
        edges: dir.join("edges.tsv"),
        labels: dir.join("labels.tsv"),
        features: dir.join("features.tsv"),
        meta: dir.join("meta.json"),
    }
}

pub fn write_bundle(g: &Graph, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let paths = bundle_paths(dir);
    let features = (g.feature_dim() > 0).then_some(paths.features.as_path());
    write_graph(g, &paths.edges, &paths.labels, features)?;
    let meta = BundleMeta {
        name: g.name().to_string(),
        n: g.n(),
        k: g.k(),
        d: g.feature_dim(),
    };
    crate::jsonio::write_json(&paths.meta, &meta)
}

pub fn load_bundle(dir: &Path) -> Result<(Graph, LoadReport)> {
    let paths = bundle_paths(dir);
    let meta: BundleMeta = crate::jsonio::read_json(&paths.meta)?;
    let features = paths.features.exists().then_some(paths.features.as_path());
    let (g, report) = load_with_dim(&paths.edges, &paths.labels, features, Some(meta.d))?;
    if g.n() != meta.n || g.k() != meta.k || g.feature_dim() != meta.d {
        return Err(Error::Integrity(format!(
            "{}: meta.json declares n={} k={} d={}, files give n={} k={} d={}",
            dir.display(),
            meta.n,
            meta.k,
            meta.d,
            g.n(),
            g.k(),
            g.feature_dim()
        )));
    }
    Ok((g.with_name(meta.name), report))
}
