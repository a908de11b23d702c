use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyPermissionError, PyValueError};
use pyo3::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;

use iidbench::evaluator::{model_by_name, pipeline_evaluate, make_split, subdivide, HyperGrid, HyperParams};
use iidbench::graph::{generate_sbm_with, load_bundle, write_bundle, SbmParams};
use iidbench::overtuning::{validutil_partial, ValidUtilTask};
use iidbench::sampler::{
    calibrate_thresholds, dataset_stats, kl_divergence as kl, reject_sample, OverlapMeasure,
    SamplerConfig, SubgraphSample as CoreSample,
};
use iidbench::seed::{derive_seed, stream};
use iidbench::stability::{inversion_number as inversions, RankingSequence};
use iidbench::graph::DiscreteDistribution;

create_exception!(iidbench_py, IidbenchError, PyException);

fn to_py_err(e: iidbench::Error) -> PyErr {
    match e.root() {
        iidbench::Error::Guard(_) => PyPermissionError::new_err(e.to_string()),
        iidbench::Error::Domain(_) | iidbench::Error::Split(_) => PyValueError::new_err(e.to_string()),
        _ => IidbenchError::new_err(e.to_string()),
    }
}

/// Serialises through JSON into plain Python dicts and lists.
fn to_python<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| IidbenchError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn from_python<T: DeserializeOwned>(py: Python<'_>, obj: &Bound<'_, PyAny>) -> PyResult<T> {
    let text: String = py.import("json")?.call_method1("dumps", (obj,))?.extract()?;
    serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Undirected labelled graph with sparse node features.
#[pyclass(frozen, from_py_object, module = "iidbench_py")]
#[derive(Clone)]
struct Graph {
    inner: iidbench::Graph,
}

#[pymethods]
impl Graph {
    #[staticmethod]
    fn load_bundle(path: &str) -> PyResult<Self> {
        let (inner, _) = load_bundle(path.as_ref()).map_err(to_py_err)?;
        Ok(Graph { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (block_sizes, p_in, p_out, feature_dim, feature_signal=1.0, indicator_noise=0.0, seed=0))]
    fn generate_sbm(
        block_sizes: Vec<usize>,
        p_in: f64,
        p_out: f64,
        feature_dim: usize,
        feature_signal: f64,
        indicator_noise: f64,
        seed: u64,
    ) -> PyResult<Self> {
        let inner = generate_sbm_with(&SbmParams {
            block_sizes,
            p_in,
            p_out,
            feature_dim,
            feature_signal,
            indicator_noise,
            seed,
        })
        .map_err(to_py_err)?;
        Ok(Graph { inner })
    }

    fn write_bundle(&self, path: &str) -> PyResult<()> {
        write_bundle(&self.inner, path.as_ref()).map_err(to_py_err)
    }

    #[getter]
    fn name(&self) -> &str {
        self.inner.name()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    #[getter]
    fn feature_dim(&self) -> usize {
        self.inner.feature_dim()
    }

    fn labels(&self) -> Vec<usize> {
        self.inner.labels().to_vec()
    }

    fn degrees(&self) -> Vec<usize> {
        self.inner.degrees()
    }

    fn neighbors(&self, v: usize) -> PyResult<Vec<usize>> {
        if v >= self.inner.n() {
            return Err(PyValueError::new_err(format!("node {v} out of range")));
        }
        Ok(self.inner.neighbors(v).to_vec())
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges().collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Graph(name={:?}, n={}, edges={}, k={}, d={})",
            self.inner.name(),
            self.inner.n(),
            self.inner.edge_count(),
            self.inner.k(),
            self.inner.feature_dim()
        )
    }
}

/// Random-walk subgraph in parent coordinates.
#[pyclass(frozen, from_py_object, module = "iidbench_py")]
#[derive(Clone)]
struct SubgraphSample {
    inner: CoreSample,
}

#[pymethods]
impl SubgraphSample {
    #[getter]
    fn parent_ids(&self) -> Vec<usize> {
        self.inner.parent_ids.clone()
    }

    #[getter]
    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges.clone()
    }

    #[getter]
    fn node_kl(&self) -> f64 {
        self.inner.node_kl
    }

    #[getter]
    fn edge_kl(&self) -> f64 {
        self.inner.edge_kl
    }

    #[getter]
    fn attempts(&self) -> usize {
        self.inner.attempts
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    fn is_connected(&self) -> bool {
        self.inner.is_connected()
    }

    fn to_graph(&self, parent: &Graph) -> PyResult<Graph> {
        let inner = self.inner.to_graph(&parent.inner).map_err(to_py_err)?;
        Ok(Graph { inner })
    }

    fn __repr__(&self) -> String {
        format!(
            "SubgraphSample(nodes={}, edges={}, node_kl={:.6}, edge_kl={:.6})",
            self.inner.node_count(),
            self.inner.edge_count(),
            self.inner.node_kl,
            self.inner.edge_kl
        )
    }
}

#[pyfunction]
fn kl_divergence(p: Vec<f64>, q: Vec<f64>) -> PyResult<f64> {
    let p = DiscreteDistribution::new(p).map_err(to_py_err)?;
    let q = DiscreteDistribution::new(q).map_err(to_py_err)?;
    kl(&p, &q).map_err(to_py_err)
}

#[pyfunction]
#[pyo3(signature = (graph, target_edges, count, node_kl_threshold=f64::INFINITY, edge_kl_threshold=f64::INFINITY, max_attempts=1000, seed=0))]
#[allow(clippy::too_many_arguments)]
fn sample(
    py: Python<'_>,
    graph: &Graph,
    target_edges: usize,
    count: usize,
    node_kl_threshold: f64,
    edge_kl_threshold: f64,
    max_attempts: usize,
    seed: u64,
) -> PyResult<Vec<SubgraphSample>> {
    let cfg = SamplerConfig {
        target_edges,
        node_kl_threshold,
        edge_kl_threshold,
        sample_count: count,
        max_attempts_per_sample: max_attempts,
        rng_seed: seed,
    };
    let g = &graph.inner;
    let samples = py.detach(|| reject_sample(g, &cfg)).map_err(to_py_err)?;
    Ok(samples.into_iter().map(|inner| SubgraphSample { inner }).collect())
}

#[pyfunction]
#[pyo3(signature = (graph, target_edges, pilot_count=100, percentile=25.0, seed=0))]
fn calibrate<'py>(
    py: Python<'py>,
    graph: &Graph,
    target_edges: usize,
    pilot_count: usize,
    percentile: f64,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = SamplerConfig {
        target_edges,
        rng_seed: seed,
        ..SamplerConfig::default()
    };
    let g = &graph.inner;
    let cal = py
        .detach(|| calibrate_thresholds(g, &cfg, pilot_count, percentile))
        .map_err(to_py_err)?;
    to_python(py, &cal)
}

#[pyfunction]
#[pyo3(signature = (samples, parent, overlap="jaccard"))]
fn stats<'py>(
    py: Python<'py>,
    samples: Vec<SubgraphSample>,
    parent: &Graph,
    overlap: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let measure = match overlap {
        "jaccard" => OverlapMeasure::Jaccard,
        "size_sum" => OverlapMeasure::SizeSum,
        other => return Err(PyValueError::new_err(format!("unknown overlap measure {other:?}"))),
    };
    let samples: Vec<CoreSample> = samples.into_iter().map(|s| s.inner).collect();
    let s = dataset_stats(&samples, &parent.inner, measure).map_err(to_py_err)?;
    to_python(py, &s)
}

fn resolve_model(name: &str) -> PyResult<std::sync::Arc<dyn iidbench::evaluator::NodeClassifier>> {
    model_by_name(name).ok_or_else(|| PyValueError::new_err(format!("unknown model {name:?}")))
}

#[pyfunction]
#[pyo3(signature = (model, grid, graphs, labeled_fraction=0.2, valid_fraction=0.5, seed=0))]
fn evaluate<'py>(
    py: Python<'py>,
    model: &str,
    grid: &Bound<'py, PyAny>,
    graphs: Vec<Graph>,
    labeled_fraction: f64,
    valid_fraction: f64,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let model = resolve_model(model)?;
    let grid: HyperGrid = from_python(py, grid)?;
    let graphs: Vec<iidbench::Graph> = graphs.into_iter().map(|g| g.inner).collect();
    let report = py
        .detach(|| pipeline_evaluate(model.as_ref(), &grid, &graphs, labeled_fraction, valid_fraction, seed))
        .map_err(to_py_err)?;
    to_python(py, &report)
}

#[pyfunction]
#[pyo3(signature = (model, graph, grid, base=None, budget=None, labeled_fraction=0.2, valid_fraction=0.5, seed=0))]
#[allow(clippy::too_many_arguments)]
fn validutil<'py>(
    py: Python<'py>,
    model: &str,
    graph: &Graph,
    grid: &Bound<'py, PyAny>,
    base: Option<&Bound<'py, PyAny>>,
    budget: Option<usize>,
    labeled_fraction: f64,
    valid_fraction: f64,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let model = resolve_model(model)?;
    let grid: HyperGrid = from_python(py, grid)?;
    let base: HyperParams = match base {
        Some(b) => from_python(py, b)?,
        None => HyperParams::new(),
    };
    let g = &graph.inner;
    let result = py
        .detach(|| {
            let split = make_split(g, labeled_fraction, derive_seed(seed, stream::SPLIT, 0))?;
            let split = subdivide(&split, valid_fraction, derive_seed(seed, stream::SUBDIVIDE, 0))?;
            let (train, valid) = split.train_valid()?;
            let task = ValidUtilTask {
                graph: g,
                train,
                valid,
                test: &split.unlabeled,
            };
            validutil_partial(model.as_ref(), &task, &base, &grid, seed, budget.unwrap_or(valid.len()))
        })
        .map_err(to_py_err)?;
    to_python(py, &result)
}

/// Inversions of each ranking in `others` against `reference`, summed.
#[pyfunction]
fn inversion_number(reference: Vec<String>, others: Vec<Vec<String>>) -> PyResult<u64> {
    let seq = |seed: u64, models: Vec<String>| RankingSequence {
        seed,
        accuracies: vec![0.0; models.len()],
        models,
    };
    let reference = seq(0, reference);
    let others: Vec<RankingSequence> = others
        .into_iter()
        .enumerate()
        .map(|(i, m)| seq(i as u64 + 1, m))
        .collect();
    inversions(&reference, &others).map_err(to_py_err)
}

#[pymodule]
fn iidbench_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("IidbenchError", m.py().get_type::<IidbenchError>())?;
    m.add_class::<Graph>()?;
    m.add_class::<SubgraphSample>()?;
    m.add_function(wrap_pyfunction!(kl_divergence, m)?)?;
    m.add_function(wrap_pyfunction!(sample, m)?)?;
    m.add_function(wrap_pyfunction!(calibrate, m)?)?;
    m.add_function(wrap_pyfunction!(stats, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(validutil, m)?)?;
    m.add_function(wrap_pyfunction!(inversion_number, m)?)?;
    Ok(())
}
