//! End-to-end acceptance checks. Each test writes one `[PASS]` or `[FAIL]`
//! line to stderr, outside the harness capture, before asserting.

use std::collections::VecDeque;
use std::io::Write as _;
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use iidbench::evaluator::{
    make_split, pipeline_evaluate, subdivide, AccessLog, FittedModel, GraphView, HyperGrid,
    HyperParams, HyperValue, NodeClassifier, PropLin,
};
use iidbench::graph::{generate_sbm_with, write_bundle, DiscreteDistribution, SbmParams, SparseFeatures};
use iidbench::overtuning::{plain_tuned_accuracy, sweep_validation_size, validutil, ValidUtilTask};
use iidbench::sampler::{
    calibrate_thresholds, kl_divergence, random_walk_sample, reject_sample, SamplerConfig,
    SubgraphSample, KL_SMOOTHING,
};
use iidbench::seed::{derive_seed, rng_from, with_workers};
use iidbench::stability::{
    inversion_number, stability_experiment, variance_comparison, ModelEntry, RankingSequence,
    SplitSpec,
};
use iidbench::summary::mean;
use iidbench::{Error, Graph, Result};

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "[{status}] criterion {id:>2} {name}: {detail}");
}

fn sbm(block_sizes: &[usize], p_in: f64, p_out: f64, dim: usize, noise: f64, seed: u64) -> Graph {
    generate_sbm_with(&SbmParams {
        block_sizes: block_sizes.to_vec(),
        p_in,
        p_out,
        feature_dim: dim,
        feature_signal: 1.0,
        indicator_noise: noise,
        seed,
    })
    .unwrap()
}

/// Smoothed KL by direct summation, written out independently of the library.
fn kl_oracle(p: &[f64], q: &[f64]) -> f64 {
    let m = p.len() as f64;
    let zp = 1.0 + m * KL_SMOOTHING;
    let zq = 1.0 + m * KL_SMOOTHING;
    let mut total = 0.0;
    for c in 0..p.len() {
        if p[c] == 0.0 {
            continue;
        }
        let ps = (p[c] + KL_SMOOTHING) / zp;
        let qs = (q[c] + KL_SMOOTHING) / zq;
        total += ps * (ps / qs).ln();
    }
    total.max(0.0)
}

fn random_distribution(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    loop {
        let w: Vec<f64> = (0..m)
            .map(|_| if rng.random::<f64>() < 0.2 { 0.0 } else { rng.random::<f64>() })
            .collect();
        let s: f64 = w.iter().sum();
        if s > 0.0 {
            return w.iter().map(|x| x / s).collect();
        }
    }
}

#[test]
fn criterion_01_kl_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    let mut worst_self: f64 = 0.0;
    for _ in 0..1000 {
        let m = rng.random_range(2..30);
        let p = random_distribution(&mut rng, m);
        let q = random_distribution(&mut rng, m);
        let dp = DiscreteDistribution::new(p.clone()).unwrap();
        let dq = DiscreteDistribution::new(q.clone()).unwrap();
        let got = kl_divergence(&dp, &dq).unwrap();
        worst = worst.max((got - kl_oracle(&p, &q)).abs());
        worst_self = worst_self.max(kl_divergence(&dp, &dp).unwrap().abs());
    }
    let elapsed = start.elapsed();
    let pass = worst <= 1e-12 && worst_self <= 1e-9 && elapsed < Duration::from_secs(1);
    report(
        1,
        "kl oracle",
        pass,
        &format!("max |diff| {worst:.2e}, max KL(p,p) {worst_self:.2e}, {elapsed:.2?}"),
    );
    assert!(pass);
}

/// Connectivity by breadth-first search over the local edge list.
fn bfs_connected(sample: &SubgraphSample) -> bool {
    let n = sample.parent_ids.len();
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in &sample.edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                queue.push_back(v);
            }
        }
    }
    count == n
}

fn sampler_parent() -> Graph {
    // about 13.7k intra-block plus 1.25k inter-block edges
    sbm(&[500, 500], 0.055, 0.005, 4, 0.0, 2)
}

#[test]
fn criterion_02_sampler_contract() {
    let g = sampler_parent();
    let start = Instant::now();
    let base = SamplerConfig {
        target_edges: 200,
        sample_count: 100,
        rng_seed: 5,
        ..SamplerConfig::default()
    };
    let cal = calibrate_thresholds(&g, &base, 100, 50.0).unwrap();
    let cfg = SamplerConfig {
        node_kl_threshold: cal.node_threshold,
        edge_kl_threshold: cal.edge_threshold,
        ..base
    };
    let one = with_workers(1, || reject_sample(&g, &cfg).unwrap());
    let eight = with_workers(8, || reject_sample(&g, &cfg).unwrap());
    let elapsed = start.elapsed();
    let connected = one.iter().all(bfs_connected);
    let exact = one.iter().all(|s| s.edge_count() == 200);
    let within = one
        .iter()
        .all(|s| s.node_kl <= cfg.node_kl_threshold && s.edge_kl <= cfg.edge_kl_threshold);
    let in_parent = one.iter().all(|s| {
        s.edges
            .iter()
            .all(|&(a, b)| g.has_edge(s.parent_ids[a], s.parent_ids[b]))
    });
    let pass = one.len() == 100
        && connected
        && exact
        && within
        && in_parent
        && one == eight
        && elapsed < Duration::from_secs(30);
    report(
        2,
        "sampler contract",
        pass,
        &format!(
            "parent {} edges, {} samples, connected={connected}, 200 edges={exact}, \
             within thresholds={within}, 1 vs 8 workers identical={}, {elapsed:.2?}",
            g.edge_count(),
            one.len(),
            one == eight
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_03_threshold_effect() {
    let g = sampler_parent();
    let base = SamplerConfig {
        target_edges: 200,
        sample_count: 100,
        rng_seed: 9,
        ..SamplerConfig::default()
    };
    let free = reject_sample(&g, &base).unwrap();
    let cal = calibrate_thresholds(&g, &base, 100, 25.0).unwrap();
    let cfg = SamplerConfig {
        node_kl_threshold: cal.node_threshold,
        edge_kl_threshold: cal.edge_threshold,
        ..base
    };
    let kept = reject_sample(&g, &cfg).unwrap();
    let node = |s: &[SubgraphSample]| mean(&s.iter().map(|x| x.node_kl).collect::<Vec<_>>());
    let edge = |s: &[SubgraphSample]| mean(&s.iter().map(|x| x.edge_kl).collect::<Vec<_>>());
    let pass = node(&kept) < node(&free) && edge(&kept) < edge(&free);
    report(
        3,
        "threshold effect",
        pass,
        &format!(
            "node KL {:.5} -> {:.5}, edge KL {:.5} -> {:.5}",
            node(&free),
            node(&kept),
            edge(&free),
            edge(&kept)
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_04_walk_kernel() {
    let (g, _) = Graph::from_edges(&[(0, 1), (0, 2), (0, 3)], vec![0, 1, 1, 1], SparseFeatures::empty(4))
        .unwrap();
    let mut counts = [0usize; 4];
    for i in 0..10_000u64 {
        let mut rng = rng_from(derive_seed(4, 0, i));
        let s = random_walk_sample(&g, 0, 1, &mut rng).unwrap();
        let leaf = s.parent_ids.iter().copied().find(|&v| v != 0).unwrap();
        counts[leaf] += 1;
    }
    let freqs: Vec<f64> = counts[1..].iter().map(|&c| c as f64 / 10_000.0).collect();
    let pass = freqs.iter().all(|f| (f - 1.0 / 3.0).abs() <= 0.02);
    report(4, "walk kernel", pass, &format!("leaf frequencies {freqs:.4?}"));
    assert!(pass);
}

fn validutil_graph(seed: u64) -> Graph {
    sbm(&[60, 60], 0.08, 0.02, 64, 0.0, seed)
}

fn overfit_params() -> HyperParams {
    HyperParams::new()
        .with("depth", 1)
        .with("l2", 0.0)
        .with("epochs", 300)
        .with("lr", 0.5)
}

fn overfit_grid() -> HyperGrid {
    HyperGrid::new()
        .with("depth", vec![1.into(), 2.into()])
        .with("epochs", vec![300.into()])
        .with("l2", vec![0.0.into()])
        .with("lr", vec![0.5.into()])
        .with("dropout", vec![0.0.into(), 0.2.into()])
}

#[test]
fn criterion_05_validutil_recovery() {
    let start = Instant::now();
    let grid = overfit_grid();
    let mut recovered = 0usize;
    let mut initial_correct = 0usize;
    let mut total = 0usize;
    let mut with = Vec::new();
    let mut without = Vec::new();
    let mut queries_ok = true;
    let mut reads_ok = true;
    for seed in 0..20u64 {
        let g = validutil_graph(100 + seed);
        let split = make_split(&g, 0.5, derive_seed(seed, 1, 0)).unwrap();
        let split = subdivide(&split, 0.5, derive_seed(seed, 2, 0)).unwrap();
        let (train, valid) = split.train_valid().unwrap();
        let task = ValidUtilTask {
            graph: &g,
            train,
            valid,
            test: &split.unlabeled,
        };
        let r = validutil(&PropLin, &task, &overfit_params(), &grid, seed).unwrap();
        for (i, &v) in r.state.nodes.iter().enumerate() {
            recovered += usize::from(r.state.pseudo_labels[i] == g.label(v));
            initial_correct += usize::from(r.state.initial_predictions[i] == g.label(v));
        }
        total += valid.len();
        queries_ok &= r.queries_search == (valid.len() * g.k()) as u64
            && r.queries_total == r.queries_search + grid.len() as u64;
        reads_ok &= r.label_reads_denied == 0 && r.label_reads_granted == train.len() as u64;
        with.push(r.test_accuracy);
        without.push(plain_tuned_accuracy(&PropLin, &task, &grid, seed).unwrap());
    }
    let elapsed = start.elapsed();
    let rate = recovered as f64 / total as f64;
    let pass = rate >= 0.9
        && mean(&with) >= mean(&without)
        && queries_ok
        && reads_ok
        && elapsed < Duration::from_secs(300);
    report(
        5,
        "validutil recovery",
        pass,
        &format!(
            "pseudo-labels correct {rate:.3} (initial predictions {:.3}), test accuracy \
             {:.4} with vs {:.4} without, t*k queries={queries_ok}, no label reads={reads_ok}, \
             {elapsed:.2?}",
            initial_correct as f64 / total as f64,
            mean(&with),
            mean(&without)
        ),
    );
    assert!(pass);
}

fn sweep_grid() -> HyperGrid {
    HyperGrid::new()
        .with("depth", vec![0.into(), 1.into(), 2.into(), 3.into()])
        .with("l2", vec![0.0.into(), 0.01.into(), 0.1.into()])
        .with("epochs", vec![100.into()])
}

#[test]
fn criterion_06_sweep_direction() {
    let g = sbm(&[500, 500], 0.01, 0.004, 16, 1.5, 6);
    let split = make_split(&g, 0.3, 1).unwrap();
    let split = subdivide(&split, 0.7, 2).unwrap();
    let seeds: Vec<u64> = (0..20).collect();
    let r = sweep_validation_size(&PropLin, &sweep_grid(), &g, &split, &[10, 50, 100, 200], &seeds)
        .unwrap();
    let rho = r.spearman();
    let means: Vec<String> = r
        .rows
        .iter()
        .map(|row| format!("{}:{:.4}", row.validation_size, row.test_accuracy_mean))
        .collect();
    let pass = rho > 0.0;
    report(6, "sweep direction", pass, &format!("spearman {rho:.3}, means {}", means.join(" ")));
    assert!(pass);
}

fn brute_force(reference: &[usize], others: &[Vec<usize>]) -> u64 {
    let mut total = 0;
    for other in others {
        let rank = |m: usize| other.iter().position(|&x| x == m).unwrap();
        for a in 0..reference.len() {
            for b in (a + 1)..reference.len() {
                if rank(reference[a]) > rank(reference[b]) {
                    total += 1;
                }
            }
        }
    }
    total
}

fn as_sequence(seed: u64, order: &[usize]) -> RankingSequence {
    RankingSequence {
        seed,
        models: order.iter().map(|i| format!("model-{i}")).collect(),
        accuracies: (0..order.len()).rev().map(|i| i as f64).collect(),
    }
}

#[test]
fn criterion_07_inversion_oracle() {
    use rand::seq::SliceRandom;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut mismatches = 0;
    for _ in 0..1000 {
        let m = rng.random_range(1..9);
        let s = rng.random_range(1..11);
        let orders: Vec<Vec<usize>> = (0..s)
            .map(|_| {
                let mut o: Vec<usize> = (0..m).collect();
                o.shuffle(&mut rng);
                o
            })
            .collect();
        let reference = as_sequence(0, &orders[0]);
        let others: Vec<RankingSequence> = orders[1..]
            .iter()
            .enumerate()
            .map(|(i, o)| as_sequence(i as u64 + 1, o))
            .collect();
        if inversion_number(&reference, &others).unwrap() != brute_force(&orders[0], &orders[1..]) {
            mismatches += 1;
        }
    }
    let same = as_sequence(0, &[2, 0, 1, 3]);
    let zero = inversion_number(&same, &vec![same.clone(); 9]).unwrap();
    let pass = mismatches == 0 && zero == 0;
    report(
        7,
        "inversion oracle",
        pass,
        &format!("{mismatches} mismatches over 1000 families, identical rankings give {zero}"),
    );
    assert!(pass);
}

fn depth_models() -> Vec<ModelEntry> {
    (0..3i64)
        .map(|depth| ModelEntry {
            name: format!("proplin-depth{depth}"),
            model: Arc::new(PropLin),
            grid: HyperGrid::new()
                .with("depth", vec![depth.into()])
                .with("l2", vec![0.01.into()])
                .with("epochs", vec![100.into()]),
        })
        .collect()
}

#[test]
fn criterion_08_stability_direction() {
    let start = Instant::now();
    // Many-block parent with sparse cross edges; the single graph is a small
    // sparse citation-sized graph with few labels per class.
    let parent = sbm(&[1000; 7], 0.006, 0.0002, 64, 1.0, 8);
    let single = sbm(&[387; 7], 0.008, 0.0002, 64, 1.0, 9);
    let cfg = SamplerConfig {
        target_edges: 5000,
        sample_count: 100,
        rng_seed: 8,
        ..SamplerConfig::default()
    };
    let cal = calibrate_thresholds(&parent, &cfg, 100, 50.0).unwrap();
    let cfg = SamplerConfig {
        node_kl_threshold: cal.node_threshold,
        edge_kl_threshold: cal.edge_threshold,
        ..cfg
    };
    let samples: Vec<Graph> = reject_sample(&parent, &cfg)
        .unwrap()
        .iter()
        .map(|s| s.to_graph(&parent).unwrap())
        .collect();
    let seeds: Vec<u64> = (0..10).collect();
    let models = depth_models();
    let iid = stability_experiment(&models, &samples, &seeds, 0.2, 0.5).unwrap();
    let splits =
        stability_experiment(&models, std::slice::from_ref(&single), &seeds, 0.1, 0.5).unwrap();

    let best = &models[2];
    let split_seeds: Vec<u64> = (0..100).collect();
    let v = variance_comparison(
        best.model.as_ref(),
        &best.grid,
        &samples,
        SplitSpec { labeled_fraction: 0.2, valid_fraction: 0.5 },
        0,
        &single,
        SplitSpec { labeled_fraction: 0.1, valid_fraction: 0.5 },
        &split_seeds,
    )
    .unwrap();
    let elapsed = start.elapsed();
    let pass = v.std_iid < v.std_splits
        && iid.inversion_number <= splits.inversion_number
        && elapsed < Duration::from_secs(600);
    report(
        8,
        "stability direction",
        pass,
        &format!(
            "std iid {:.4} vs splits {:.4}, inversions iid {} vs splits {}, {elapsed:.2?}",
            v.std_iid, v.std_splits, iid.inversion_number, splits.inversion_number
        ),
    );
    assert!(pass);
}

/// Reads every label in the graph, held-out nodes included.
struct Leaky;

struct Zero;

impl FittedModel for Zero {
    fn predict(&self, nodes: &[usize]) -> Vec<usize> {
        vec![0; nodes.len()]
    }
}

impl NodeClassifier for Leaky {
    fn name(&self) -> &str {
        "leaky"
    }

    fn fit(
        &self,
        view: &GraphView<'_>,
        _train: &[(usize, usize)],
        _params: &HyperParams,
        _seed: u64,
    ) -> Result<Box<dyn FittedModel>> {
        for v in 0..view.n() {
            view.label(v)?;
        }
        Ok(Box::new(Zero))
    }
}

#[test]
fn criterion_09_pipeline_hygiene() {
    let graphs: Vec<Graph> = (0..10).map(|s| sbm(&[40, 40], 0.1, 0.02, 8, 0.5, s)).collect();
    let grid = HyperGrid::new().with("x", vec![HyperValue::Int(0)]);
    let tripped = matches!(
        pipeline_evaluate(&Leaky, &grid, &graphs, 0.2, 0.5, 0).map_err(|e| e.root().to_string()),
        Err(ref m) if m.contains("label access violation")
    );
    let caught = matches!(
        pipeline_evaluate(&Leaky, &grid, &graphs, 0.2, 0.5, 0),
        Err(ref e) if matches!(e.root(), Error::Guard(_))
    );
    let log = AccessLog::default();
    let view = GraphView::new(&graphs[0], &[0], &log);
    let direct = Leaky.fit(&view, &[], &HyperParams::new(), 0).is_err() && log.counts().label_reads_denied == 1;

    let r = pipeline_evaluate(&PropLin, &depth_models()[1].grid, &graphs, 0.2, 0.5, 3).unwrap();
    let clean = r.graphs.iter().all(|e| e.access.label_reads_denied == 0);
    let pass = tripped && caught && direct && clean;
    report(
        9,
        "pipeline hygiene",
        pass,
        &format!("leaky model caught={caught}, guard log={direct}, full runs clean={clean}"),
    );
    assert!(pass);
}

fn run_cli(dir: &Path, args: &[&str]) -> i32 {
    let status = Command::new(env!("CARGO_BIN_EXE_iidbench"))
        .current_dir(dir)
        .args(args)
        .status()
        .expect("spawn cli");
    status.code().unwrap_or(-1)
}

fn without_timestamp(path: &Path) -> Value {
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    v.as_object_mut().unwrap().remove("timestamp");
    v
}

/// Every file under `dir`, relative path and bytes, with report timestamps removed.
fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
                continue;
            }
            let rel = p.strip_prefix(dir).unwrap().display().to_string();
            let bytes = std::fs::read(&p).unwrap();
            let is_report = serde_json::from_slice::<Value>(&bytes)
                .ok()
                .is_some_and(|v| v.get("timestamp").is_some());
            let bytes = if is_report {
                serde_json::to_vec(&without_timestamp(&p)).unwrap()
            } else {
                bytes
            };
            out.push((rel, bytes));
        }
    }
    out.sort();
    out
}

#[test]
fn criterion_10_cli_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("grid.json"), r#"{"depth": [0, 1, 2], "epochs": [60]}"#).unwrap();
    std::fs::write(
        d.join("models.json"),
        r#"[{"name": "d0", "model": "proplin", "grid": {"depth": [0], "epochs": [60]}},
            {"name": "d2", "model": "proplin", "grid": {"depth": [2], "epochs": [60]}},
            {"name": "maj", "model": "majority", "grid": {"unused": [0]}}]"#,
    )
    .unwrap();
    write_bundle(&sbm(&[200, 200], 0.03, 0.005, 8, 1.0, 10), &d.join("parent")).unwrap();

    let commands: Vec<(&str, Vec<&str>, &str)> = vec![
        ("generate", vec!["--seed", "3", "generate", "--out", "gen", "--blocks", "50,50"], "gen"),
        (
            "sample",
            vec![
                "--seed", "7", "sample", "--graph", "parent", "--out", "samples", "--edges", "100",
                "--count", "12", "--calibrate-percentile", "50", "--pilot-count", "20",
            ],
            "samples",
        ),
        (
            "stats",
            vec!["--seed", "7", "stats", "--samples", "samples", "--graph", "parent", "--out", "stats.json"],
            "stats.json",
        ),
        (
            "eval",
            vec!["--seed", "1", "eval", "--grid", "grid.json", "--samples", "samples", "--out", "report.json"],
            "report.json",
        ),
        (
            "validutil",
            vec![
                "--seed", "2", "validutil", "--graph", "parent", "--grid", "grid.json", "--budget", "10",
                "--base", "depth=1,epochs=60", "--out", "validutil.json",
            ],
            "validutil.json",
        ),
        (
            "sweep",
            vec![
                "--seed", "4", "sweep", "--graph", "parent", "--grid", "grid.json", "--sizes", "5,10,20",
                "--runs", "3", "--out", "sweep",
            ],
            "sweep",
        ),
        (
            "stability",
            vec![
                "--seed", "5", "stability", "--models", "models.json", "--samples", "samples", "--runs",
                "3", "--single-graph", "parent", "--split-runs", "5", "--out", "stability",
            ],
            "stability",
        ),
    ];

    let mut failures = Vec::new();
    for (name, args, output) in &commands {
        let target = d.join(output);
        let mut runs = Vec::new();
        for workers in ["1", "3"] {
            let mut full: Vec<&str> = vec!["--workers", workers];
            full.extend(args.iter());
            let code = run_cli(d, &full);
            if code != 0 {
                failures.push(format!("{name} exited {code}"));
                break;
            }
            runs.push(if target.is_dir() {
                snapshot(&target)
            } else {
                vec![(output.to_string(), serde_json::to_vec(&without_timestamp(&target)).unwrap())]
            });
        }
        if runs.len() == 2 && runs[0] != runs[1] {
            failures.push(format!("{name} output differs between reruns"));
        }
    }

    let infeasible = run_cli(
        d,
        &[
            "sample", "--graph", "parent", "--out", "bad", "--edges", "100", "--count", "2",
            "--node-kl-thr", "0", "--edge-kl-thr", "0", "--max-attempts", "5",
        ],
    );
    let config = run_cli(d, &["eval", "--grid", "missing.json", "--samples", "samples", "--out", "x.json"]);
    if infeasible != 3 {
        failures.push(format!("infeasible sampling exited {infeasible}"));
    }
    if config != 2 {
        failures.push(format!("missing grid exited {config}"));
    }

    let pass = failures.is_empty();
    let detail = if pass {
        format!("{} commands byte-identical across reruns and worker counts, exit codes 3 and 2", commands.len())
    } else {
        failures.join("; ")
    };
    report(10, "cli determinism", pass, &detail);
    assert!(pass);
}
