use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use iidbench::evaluator::{
    make_split, model_by_name, pipeline_evaluate, subdivide, HyperGrid, HyperParams, HyperValue,
    NodeClassifier,
};
use iidbench::graph::{generate_sbm_with, load_bundle, write_bundle, SbmParams};
use iidbench::jsonio::{read_json, write_json};
use iidbench::overtuning::{plain_tuned_accuracy, sweep_validation_size, validutil_partial, ValidUtilTask};
use iidbench::sampler::{
    calibrate_thresholds, dataset_stats, load_sample_graphs, read_samples, reject_sample,
    write_samples, OverlapMeasure, SamplerConfig,
};
use iidbench::seed::{derive_seed, stream, with_workers};
use iidbench::stability::{stability_experiment, variance_comparison, ModelEntry, SplitSpec};
use iidbench::{Error, Graph};

#[derive(Parser, Debug)]
#[command(name = "iidbench", version, about = "Build and evaluate i.i.d. graph benchmarks")]
struct Cli {
    /// Master seed; every random stream is derived from it
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads (0 = all cores); results do not depend on it
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a stochastic block model graph bundle
    Generate(GenerateArgs),
    /// Draw KL-thresholded random-walk subgraphs from a graph bundle
    Sample(SampleArgs),
    /// Overlap, coverage and KL statistics of a sample directory
    Stats(StatsArgs),
    /// Two-set evaluation of a model over every sample graph
    Eval(EvalArgs),
    /// Pseudo-label search over validation nodes
    Validutil(ValidUtilArgs),
    /// Test accuracy as a function of validation-set size
    Sweep(SweepArgs),
    /// Ranking inversions across seeds and accuracy variance
    Stability(StabilityArgs),
}

#[derive(Args, Debug, Serialize)]
struct GenerateArgs {
    #[arg(long)]
    out: PathBuf,
    /// Comma-separated block sizes
    #[arg(long, value_delimiter = ',', default_values_t = [500usize, 500])]
    blocks: Vec<usize>,
    #[arg(long, default_value_t = 0.03)]
    p_in: f64,
    #[arg(long, default_value_t = 0.002)]
    p_out: f64,
    #[arg(long, default_value_t = 16)]
    dim: usize,
    #[arg(long, default_value_t = 1.0)]
    signal: f64,
    /// Std of Gaussian noise on the block-indicator coordinates
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Overlap {
    Jaccard,
    SizeSum,
}

impl From<Overlap> for OverlapMeasure {
    fn from(o: Overlap) -> Self {
        match o {
            Overlap::Jaccard => OverlapMeasure::Jaccard,
            Overlap::SizeSum => OverlapMeasure::SizeSum,
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct SampleArgs {
    /// Parent graph bundle
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Edges per subgraph
    #[arg(long, default_value_t = 5000)]
    edges: usize,
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long, default_value_t = 1000)]
    max_attempts: usize,
    #[arg(long, default_value_t = f64::INFINITY)]
    #[serde(with = "iidbench::sampler::threshold_serde")]
    node_kl_thr: f64,
    #[arg(long, default_value_t = f64::INFINITY)]
    #[serde(with = "iidbench::sampler::threshold_serde")]
    edge_kl_thr: f64,
    /// Replace both thresholds by this percentile of an unthresholded pilot
    #[arg(long)]
    calibrate_percentile: Option<f64>,
    #[arg(long, default_value_t = 100)]
    pilot_count: usize,
    #[arg(long, value_enum, default_value_t = Overlap::Jaccard)]
    overlap: Overlap,
}

#[derive(Args, Debug, Serialize)]
struct StatsArgs {
    #[arg(long)]
    samples: PathBuf,
    /// Parent graph bundle
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Overlap::Jaccard)]
    overlap: Overlap,
}

#[derive(Args, Debug, Serialize)]
struct Fractions {
    #[arg(long, default_value_t = 0.2)]
    labeled_fraction: f64,
    #[arg(long, default_value_t = 0.5)]
    valid_fraction: f64,
}

#[derive(Args, Debug, Serialize)]
struct EvalArgs {
    #[arg(long, default_value = "proplin")]
    model: String,
    /// JSON object mapping hyper-parameter names to candidate lists
    #[arg(long)]
    grid: PathBuf,
    #[arg(long)]
    samples: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    fractions: Fractions,
}

#[derive(Args, Debug, Serialize)]
struct ValidUtilArgs {
    #[arg(long, default_value = "proplin")]
    model: String,
    #[arg(long)]
    graph: PathBuf,
    /// Grid searched after the pseudo-labels are fixed
    #[arg(long)]
    grid: PathBuf,
    /// Hyper-parameters of the initial and search fits, as name=value pairs
    #[arg(long, value_delimiter = ',')]
    base: Vec<String>,
    /// Validation nodes to search, ascending; all of them when omitted
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    fractions: Fractions,
}

#[derive(Args, Debug, Serialize)]
struct SweepArgs {
    #[arg(long, default_value = "proplin")]
    model: String,
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    grid: PathBuf,
    #[arg(long, value_delimiter = ',', default_values_t = [10usize, 50, 100, 200])]
    sizes: Vec<usize>,
    /// Number of seeds averaged per size
    #[arg(long, default_value_t = 20)]
    runs: usize,
    /// Directory receiving sweep.json and sweep.tsv
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    fractions: Fractions,
}

#[derive(Args, Debug, Serialize)]
struct StabilityArgs {
    /// JSON list of {"name", "model", "grid"} entries
    #[arg(long)]
    models: PathBuf,
    #[arg(long)]
    samples: PathBuf,
    /// Number of seeds; the first one is the reference ranking
    #[arg(long, default_value_t = 10)]
    runs: usize,
    /// Graph bundle for the random-splits arm
    #[arg(long)]
    single_graph: Option<PathBuf>,
    #[arg(long, default_value_t = 0.05)]
    single_labeled_fraction: f64,
    /// Random splits of the single graph in the variance comparison
    #[arg(long, default_value_t = 100)]
    split_runs: usize,
    /// Directory receiving stability.json and variance.json
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    fractions: Fractions,
}

#[derive(Debug, Deserialize)]
struct ModelSpec {
    name: String,
    model: String,
    grid: HyperGrid,
}

/// Failure with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e.root() {
            Error::ThresholdInfeasible { .. } | Error::Exhausted { .. } => 3,
            Error::Model(_) | Error::Guard(_) => 4,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn config_error(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

type CmdResult<T = ()> = Result<T, Failure>;

fn timestamp() -> String {
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("unix:{secs}")
}

fn absolute(path: &Path) -> PathBuf {
    std::path::absolute(path).unwrap_or_else(|_| path.to_path_buf())
}

/// Writes `{command, seed, config, result, timestamp}`. Everything except
/// `timestamp` is a function of the inputs.
fn write_report(path: &Path, command: &str, seed: u64, config: &impl Serialize, result: Value) -> CmdResult {
    let report = json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "seed": seed,
        "config": config,
        "result": result,
        "timestamp": timestamp(),
    });
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| config_error(format!("{}: {e}", parent.display())))?;
    }
    write_json(path, &report)?;
    Ok(())
}

fn to_value(value: &impl Serialize) -> Value {
    serde_json::to_value(value).expect("report types serialise")
}

fn resolve_model(name: &str) -> CmdResult<Arc<dyn NodeClassifier>> {
    model_by_name(name).ok_or_else(|| config_error(format!("unknown model {name:?}")))
}

fn load_graph(path: &Path) -> CmdResult<Graph> {
    Ok(load_bundle(path)?.0)
}

fn parse_params(pairs: &[String]) -> CmdResult<HyperParams> {
    let mut params = HyperParams::new();
    for pair in pairs.iter().filter(|p| !p.is_empty()) {
        let (name, raw) = pair
            .split_once('=')
            .ok_or_else(|| config_error(format!("expected name=value, got {pair:?}")))?;
        let value = if let Ok(i) = raw.parse::<i64>() {
            HyperValue::Int(i)
        } else if let Ok(x) = raw.parse::<f64>() {
            HyperValue::Real(x)
        } else {
            HyperValue::Text(raw.to_string())
        };
        params.set(name, value);
    }
    Ok(params)
}

fn seed_list(seed: u64, tag: u64, count: usize) -> Vec<u64> {
    (0..count as u64).map(|i| derive_seed(seed, tag, i)).collect()
}

fn cmd_generate(args: &GenerateArgs, seed: u64) -> CmdResult {
    let g = generate_sbm_with(&SbmParams {
        block_sizes: args.blocks.clone(),
        p_in: args.p_in,
        p_out: args.p_out,
        feature_dim: args.dim,
        feature_signal: args.signal,
        indicator_noise: args.noise,
        seed,
    })?;
    write_bundle(&g, &args.out)?;
    Ok(())
}

fn cmd_sample(args: &SampleArgs, seed: u64) -> CmdResult {
    let g = load_graph(&args.graph)?;
    let mut cfg = SamplerConfig {
        target_edges: args.edges,
        node_kl_threshold: args.node_kl_thr,
        edge_kl_threshold: args.edge_kl_thr,
        sample_count: args.count,
        max_attempts_per_sample: args.max_attempts,
        rng_seed: seed,
    };
    let calibration = match args.calibrate_percentile {
        Some(pct) => {
            let cal = calibrate_thresholds(&g, &cfg, args.pilot_count, pct)?;
            cfg.node_kl_threshold = cal.node_threshold;
            cfg.edge_kl_threshold = cal.edge_threshold;
            Some(cal)
        }
        None => None,
    };
    let samples = reject_sample(&g, &cfg)?;
    write_samples(&args.out, &samples, &g, seed, |i| cfg.slot_seed(i))?;
    let attempts: usize = samples.iter().map(|s| s.attempts).sum();
    let stats = dataset_stats(&samples, &g, args.overlap.into())?;
    let result = json!({
        "sampler": cfg,
        "calibration": calibration,
        "attempts": attempts,
        "acceptance_rate": samples.len() as f64 / attempts as f64,
        "stats": stats,
    });
    write_report(&args.out.join("stats.json"), "sample", seed, args, result)
}

fn cmd_stats(args: &StatsArgs, seed: u64) -> CmdResult {
    let g = load_graph(&args.graph)?;
    let samples = read_samples(&args.samples, &g)?;
    if samples.len() < 2 {
        return Err(config_error(format!(
            "{}: need at least 2 samples, found {}",
            args.samples.display(),
            samples.len()
        )));
    }
    let stats = dataset_stats(&samples, &g, args.overlap.into())?;
    write_report(&args.out, "stats", seed, args, to_value(&stats))
}

fn cmd_eval(args: &EvalArgs, seed: u64) -> CmdResult {
    let model = resolve_model(&args.model)?;
    let grid = HyperGrid::from_json_file(&args.grid)?;
    let graphs = load_sample_graphs(&args.samples)?;
    if graphs.is_empty() {
        return Err(config_error(format!("{}: no sample bundles", args.samples.display())));
    }
    let report = pipeline_evaluate(
        model.as_ref(),
        &grid,
        &graphs,
        args.fractions.labeled_fraction,
        args.fractions.valid_fraction,
        seed,
    )?;
    write_report(&args.out, "eval", seed, args, to_value(&report))
}

fn cmd_validutil(args: &ValidUtilArgs, seed: u64) -> CmdResult {
    let model = resolve_model(&args.model)?;
    let grid = HyperGrid::from_json_file(&args.grid)?;
    let base = parse_params(&args.base)?;
    let g = load_graph(&args.graph)?;
    let split = make_split(&g, args.fractions.labeled_fraction, derive_seed(seed, stream::SPLIT, 0))?;
    let split = subdivide(&split, args.fractions.valid_fraction, derive_seed(seed, stream::SUBDIVIDE, 0))?;
    let (train, valid) = split.train_valid()?;
    let task = ValidUtilTask {
        graph: &g,
        train,
        valid,
        test: &split.unlabeled,
    };
    let budget = args.budget.unwrap_or(valid.len());
    let result = validutil_partial(model.as_ref(), &task, &base, &grid, seed, budget)?;
    let plain = plain_tuned_accuracy(model.as_ref(), &task, &grid, seed)?;
    let report = json!({
        "budget": budget,
        "train_size": train.len(),
        "valid_size": valid.len(),
        "test_size": split.unlabeled.len(),
        "plain_test_accuracy": plain,
        "validutil": result,
    });
    write_report(&args.out, "validutil", seed, args, report)
}

fn cmd_sweep(args: &SweepArgs, seed: u64) -> CmdResult {
    let model = resolve_model(&args.model)?;
    let grid = HyperGrid::from_json_file(&args.grid)?;
    let g = load_graph(&args.graph)?;
    let split = make_split(&g, args.fractions.labeled_fraction, derive_seed(seed, stream::SPLIT, 0))?;
    let split = subdivide(&split, args.fractions.valid_fraction, derive_seed(seed, stream::SUBDIVIDE, 0))?;
    let seeds = seed_list(seed, stream::SWEEP, args.runs);
    let report = sweep_validation_size(model.as_ref(), &grid, &g, &split, &args.sizes, &seeds)?;
    let result = json!({
        "spearman": report.spearman(),
        "sweep": report,
    });
    write_report(&args.out.join("sweep.json"), "sweep", seed, args, result)?;
    let tsv = args.out.join("sweep.tsv");
    fs::write(&tsv, report.to_tsv()).map_err(|e| config_error(format!("{}: {e}", tsv.display())))?;
    Ok(())
}

fn cmd_stability(args: &StabilityArgs, seed: u64) -> CmdResult {
    let specs: Vec<ModelSpec> = read_json(&args.models)?;
    if specs.is_empty() {
        return Err(config_error(format!("{}: no models", args.models.display())));
    }
    let entries = specs
        .iter()
        .map(|s| {
            Ok(ModelEntry {
                name: s.name.clone(),
                model: resolve_model(&s.model)?,
                grid: s.grid.clone(),
            })
        })
        .collect::<CmdResult<Vec<_>>>()?;
    let graphs = load_sample_graphs(&args.samples)?;
    if graphs.is_empty() {
        return Err(config_error(format!("{}: no sample bundles", args.samples.display())));
    }
    let seeds = seed_list(seed, stream::STABILITY, args.runs);
    let (lf, vf) = (args.fractions.labeled_fraction, args.fractions.valid_fraction);
    let iid = stability_experiment(&entries, &graphs, &seeds, lf, vf)?;

    let single = args.single_graph.as_deref().map(load_graph).transpose()?;
    let splits = match &single {
        Some(g) => Some(stability_experiment(
            &entries,
            std::slice::from_ref(g),
            &seeds,
            args.single_labeled_fraction,
            vf,
        )?),
        None => None,
    };
    let result = json!({
        "model_order": specs.iter().map(|s| s.name.as_str()).collect::<Vec<_>>(),
        "iid": iid,
        "splits": splits,
    });
    write_report(&args.out.join("stability.json"), "stability", seed, args, result)?;

    if let Some(g) = &single {
        let first = &entries[0];
        let split_seeds = seed_list(seed, stream::SPLIT, args.split_runs);
        let v = variance_comparison(
            first.model.as_ref(),
            &first.grid,
            &graphs,
            SplitSpec { labeled_fraction: lf, valid_fraction: vf },
            seed,
            g,
            SplitSpec {
                labeled_fraction: args.single_labeled_fraction,
                valid_fraction: vf,
            },
            &split_seeds,
        )?;
        let result = json!({ "model": first.name, "comparison": v });
        write_report(&args.out.join("variance.json"), "stability", seed, args, result)?;
    }
    Ok(())
}

fn run(cli: &Cli) -> CmdResult {
    let seed = cli.seed;
    match &cli.command {
        Command::Generate(a) => cmd_generate(a, seed),
        Command::Sample(a) => cmd_sample(a, seed),
        Command::Stats(a) => cmd_stats(a, seed),
        Command::Eval(a) => cmd_eval(a, seed),
        Command::Validutil(a) => cmd_validutil(a, seed),
        Command::Sweep(a) => cmd_sweep(a, seed),
        Command::Stability(a) => cmd_stability(a, seed),
    }
}

fn main() -> ExitCode {
    let mut cli = Cli::parse();
    // Reports record absolute paths so they can be traced back to inputs.
    match &mut cli.command {
        Command::Generate(a) => a.out = absolute(&a.out),
        Command::Sample(a) => {
            a.graph = absolute(&a.graph);
            a.out = absolute(&a.out);
        }
        Command::Stats(a) => {
            a.samples = absolute(&a.samples);
            a.graph = absolute(&a.graph);
            a.out = absolute(&a.out);
        }
        Command::Eval(a) => {
            a.grid = absolute(&a.grid);
            a.samples = absolute(&a.samples);
            a.out = absolute(&a.out);
        }
        Command::Validutil(a) => {
            a.graph = absolute(&a.graph);
            a.grid = absolute(&a.grid);
            a.out = absolute(&a.out);
        }
        Command::Sweep(a) => {
            a.graph = absolute(&a.graph);
            a.grid = absolute(&a.grid);
            a.out = absolute(&a.out);
        }
        Command::Stability(a) => {
            a.models = absolute(&a.models);
            a.samples = absolute(&a.samples);
            a.single_graph = a.single_graph.as_deref().map(absolute);
            a.out = absolute(&a.out);
        }
    }
    let workers = cli.workers;
    match with_workers(workers, || run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
