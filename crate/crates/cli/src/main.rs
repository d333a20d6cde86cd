//! `mgm`: command-line front end for multiscale Grassmann representations.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use mgm_core::cluster::{cluster_distances, evaluate, ClusteringMethod, MetricsRecord};
use mgm_core::error::Stage;
use mgm_core::io::{
    export_scatter, load_labels, load_matrix, meta_path, preprocess, preset, read_distance_matrix,
    read_numeric_matrix, run_experiment, write_distance_matrix, write_json, write_labels, write_numeric_matrix,
    write_scatter, ClassLabels, Delimiter, DistanceMeta, ExpressionMatrix, FileFormat, IoError, LoadOptions,
    Orientation, PipelineConfig, PRESET_NAMES,
};
use mgm_core::mdr::{build_stack, pca_reduce};
use mgm_core::pipeline::run_mgm;
use mgm_core::scales::{describe_density, sample_scales};
use mgm_core::{Error, Matrix};

#[derive(Parser, Debug)]
#[command(name = "mgm", version, about = "Multiscale Grassmann manifold clustering of expression matrices")]
struct Cli {
    /// Worker threads for parallel stages (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the scale set produced by the sampling function.
    SampleScales(SampleScalesArgs),
    /// Write one embedding file per scale.
    Embed(DataCommand),
    /// Compute the pairwise Grassmann distance matrix for one seed.
    Mgm(DataCommand),
    /// Cluster a saved distance matrix.
    Cluster(ClusterArgs),
    /// Score predicted labels against ground truth.
    Evaluate(EvaluateArgs),
    /// Full multi-seed experiment with baselines.
    Pipeline(DataCommand),
    /// Two-dimensional coordinates for plotting.
    Scatter(ScatterArgs),
}

#[derive(Args, Debug, Clone, Default)]
struct ConfigArgs {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Named parameter set, applied before the config file.
    #[arg(long)]
    preset: Option<String>,
    /// Grassmann metric: geodesic, chordal, fubini-study, martin or procrustes.
    #[arg(long)]
    metric: Option<String>,
    /// Number of clusters (defaults to the number of label classes).
    #[arg(long)]
    k: Option<usize>,
    /// Single seed.
    #[arg(long, conflicts_with = "seeds")]
    seed: Option<u64>,
    /// Comma-separated seeds.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Keep only this many highest-variance features.
    #[arg(long)]
    top_features: Option<usize>,
    /// Write the distance matrix for every seed.
    #[arg(long)]
    save_distance_matrix: bool,
    /// Extra `key=value` overrides, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args, Debug, Clone)]
struct DataArgs {
    /// Expression matrix (csv or tsv).
    #[arg(long)]
    data: PathBuf,
    /// Sidecar label file, one label per line in sample order.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Force the delimiter instead of using the file extension.
    #[arg(long)]
    format: Option<String>,
    /// cells-as-rows (default) or cells-as-cols.
    #[arg(long, default_value = "cells-as-rows")]
    orientation: String,
}

#[derive(Args, Debug)]
struct DataCommand {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    config: ConfigArgs,
    /// Output directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SampleScalesArgs {
    #[arg(long)]
    min: Option<usize>,
    #[arg(long)]
    max: Option<usize>,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    power: Option<f64>,
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ClusterArgs {
    /// Distance matrix file written by `mgm`.
    #[arg(long, visible_alias = "data")]
    distances: PathBuf,
    /// Ground-truth labels; adds a metrics report.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// spectral or kmeans-mds (defaults to the configured method).
    #[arg(long)]
    method: Option<String>,
    /// MDS dimension for kmeans-mds.
    #[arg(long)]
    embed_dim: Option<usize>,
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    /// Predicted labels, one per line.
    #[arg(long)]
    pred: PathBuf,
    /// Ground-truth labels, one per line.
    #[arg(long)]
    labels: PathBuf,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ScatterArgs {
    /// Distance matrix file.
    #[arg(long, visible_alias = "data", required_unless_present = "coords")]
    distances: Option<PathBuf>,
    /// Externally computed two-column coordinates to pass through instead.
    #[arg(long, conflicts_with = "distances")]
    coords: Option<PathBuf>,
    /// Labels for the third column; row indices are used without them.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Output file (defaults to `scatter.csv` in `--out-dir` or the working directory).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn config_error(msg: impl Into<String>) -> Error {
    Error::at(Stage::Config, IoError::Config(msg.into()))
}

fn build_config(args: &ConfigArgs) -> Result<PipelineConfig, Error> {
    let tag = |e: IoError| Error::at(Stage::Config, e);
    let mut cfg = match &args.preset {
        Some(name) => preset(name).ok_or_else(|| {
            config_error(format!("unknown preset '{name}' (known: {})", PRESET_NAMES.join(", ")))
        })?,
        None => PipelineConfig::default(),
    };
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
        // a preset given on the command line is the base the file builds on
        let text = match &args.preset {
            Some(name) if !text.lines().any(|l| l.trim_start().starts_with("preset")) => {
                format!("preset = {name}\n{text}")
            }
            _ => text,
        };
        cfg = PipelineConfig::parse_str(&text).map_err(tag)?;
    }
    if let Some(m) = &args.metric {
        cfg.set("grassmann.metric", m).map_err(tag)?;
    }
    if let Some(k) = args.k {
        cfg.clustering.k = Some(k);
    }
    if let Some(s) = args.seed {
        cfg.seeds = vec![s];
    }
    if let Some(s) = &args.seeds {
        cfg.seeds = s.clone();
    }
    if let Some(t) = args.top_features {
        cfg.preprocess.top_features = Some(t);
    }
    if args.save_distance_matrix {
        cfg.save_distance_matrix = true;
    }
    for kv in &args.overrides {
        let (k, v) = kv.split_once('=').ok_or_else(|| config_error(format!("expected KEY=VALUE, got '{kv}'")))?;
        cfg.set(k, v).map_err(tag)?;
    }
    cfg.validate().map_err(tag)?;
    Ok(cfg)
}

fn load_data(args: &DataArgs, require_labels: bool) -> Result<ExpressionMatrix, Error> {
    let tag = |e: IoError| Error::at(Stage::Load, e);
    let format = match &args.format {
        Some(f) => f.parse::<FileFormat>().map_err(|e| Error::at(Stage::Config, e))?,
        None => FileFormat::from_path(&args.data),
    };
    let orientation: Orientation = args.orientation.parse().map_err(|e| Error::at(Stage::Config, e))?;
    let mut x = load_matrix(&args.data, &LoadOptions::new(format, orientation)).map_err(tag)?;
    match &args.labels {
        Some(path) => {
            let names = load_labels(path).map_err(tag)?;
            x = x.with_labels(ClassLabels::from_names(&names)).map_err(tag)?;
        }
        None if require_labels => {
            return Err(config_error("--labels is required for this command"));
        }
        None => {}
    }
    Ok(x)
}

fn out_dir(dir: &Option<PathBuf>) -> Result<Option<&Path>, Error> {
    if let Some(d) = dir {
        fs::create_dir_all(d).map_err(|e| Error::at(Stage::Export, IoError::Config(format!("{}: {e}", d.display()))))?;
    }
    Ok(dir.as_deref())
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn export<T>(r: Result<T, IoError>) -> Result<T, Error> {
    r.map_err(|e| Error::at(Stage::Export, e))
}

fn cmd_sample_scales(args: &SampleScalesArgs) -> Result<(), Error> {
    let cfg = build_config(&args.config)?;
    let mut spec = cfg.mgm.scales;
    spec.min = args.min.unwrap_or(spec.min);
    spec.max = args.max.unwrap_or(spec.max);
    spec.count = args.count.unwrap_or(spec.count);
    spec.power = args.power.unwrap_or(spec.power);
    let set = sample_scales(&spec).map_err(|e| Error::at(Stage::ScaleSampling, e))?;
    let density = describe_density(&set).map_err(|e| Error::at(Stage::ScaleSampling, e))?;
    let value = json!({
        "min": spec.min,
        "max": spec.max,
        "count": spec.count,
        "power": spec.power,
        "scales": set.as_slice(),
        "p": set.len(),
        "min_gap": density.min_gap,
        "max_gap": density.max_gap,
    });
    if let Some(dir) = out_dir(&args.out_dir)? {
        export(write_json(&dir.join("scales.json"), &value))?;
    }
    print_json(&value);
    Ok(())
}

fn cmd_embed(args: &DataCommand) -> Result<(), Error> {
    let cfg = build_config(&args.config)?;
    let dir = out_dir(&args.out_dir)?.ok_or_else(|| config_error("embed needs --out-dir"))?;
    let x = load_data(&args.data, false)?;
    let x = preprocess(&x, &cfg.preprocess).map_err(|e| Error::at(Stage::Preprocess, e))?;
    let scales = sample_scales(&cfg.mgm.scales).map_err(|e| Error::at(Stage::ScaleSampling, e))?;
    let reduced;
    let input: &Matrix = match cfg.mgm.pca_dim {
        Some(dim) => {
            reduced = pca_reduce(x.values(), dim).map_err(|e| Error::at(Stage::Pca, e))?;
            &reduced
        }
        None => x.values(),
    };
    let seed = cfg.seeds[0];
    let stack = build_stack(input, &scales, &cfg.mgm.embedding, seed).map_err(|e| Error::at(Stage::Embedding, e))?;
    let mut files = Vec::new();
    for (scale, e) in stack.scales().iter().zip(stack.embeddings()) {
        let path = dir.join(format!("embedding_{scale}.csv"));
        export(write_numeric_matrix(&path, e, Delimiter::Comma))?;
        files.push(path.display().to_string());
    }
    print_json(&json!({
        "scales": stack.scales(),
        "embedding_dim": stack.embedding_dim(),
        "cells": stack.sample_count(),
        "seed": seed,
        "external_pattern": dir.join("embedding_{scale}.csv").display().to_string(),
        "files": files,
    }));
    Ok(())
}

fn cmd_mgm(args: &DataCommand) -> Result<(), Error> {
    let cfg = build_config(&args.config)?;
    let dir = out_dir(&args.out_dir)?.ok_or_else(|| config_error("mgm needs --out-dir"))?;
    let x = load_data(&args.data, false)?;
    let x = preprocess(&x, &cfg.preprocess).map_err(|e| Error::at(Stage::Preprocess, e))?;
    let seed = cfg.seeds[0];
    let out = run_mgm(x.values(), &cfg.mgm, seed)?;
    let meta = DistanceMeta {
        metric: out.distances.metric(),
        n: out.report.embedding_dim,
        p: out.report.p,
        scales: out.report.scales.clone(),
        seed,
        cells: out.distances.size(),
    };
    let path = dir.join("distance_matrix.csv");
    export(write_distance_matrix(&path, &out.distances, &meta))?;
    export(write_json(&dir.join("run_report.json"), &out.report))?;
    print_json(&json!({
        "distance_matrix": path.display().to_string(),
        "metadata": meta_path(&path).display().to_string(),
        "input_checksum": x.checksum(),
        "report": out.report,
    }));
    Ok(())
}

fn truth_ids(path: &Path, expected: usize) -> Result<Vec<usize>, Error> {
    let tag = |e: IoError| Error::at(Stage::Load, e);
    let names = load_labels(path).map_err(tag)?;
    if names.len() != expected {
        return Err(tag(IoError::LabelLengthMismatch { labels: names.len(), samples: expected }));
    }
    Ok(ClassLabels::from_names(&names).ids().to_vec())
}

fn cmd_cluster(args: &ClusterArgs) -> Result<(), Error> {
    let cfg = build_config(&args.config)?;
    let (d, _) = read_distance_matrix(&args.distances).map_err(|e| Error::at(Stage::Load, e))?;
    let method = match &args.method {
        Some(m) => m.parse::<ClusteringMethod>().map_err(|e| Error::at(Stage::Config, e))?,
        None => cfg.clustering.method,
    };
    let truth = args.labels.as_deref().map(|p| truth_ids(p, d.size())).transpose()?;
    let k = match (cfg.clustering.k, &truth) {
        (Some(k), _) => k,
        (None, Some(t)) => t.iter().max().map_or(1, |m| m + 1),
        (None, None) => return Err(config_error("--k is required without --labels")),
    };
    let seed = cfg.seeds[0];
    let embed_dim = args.embed_dim.or(cfg.clustering.embed_dim);
    let result =
        cluster_distances(d.values(), method, k, embed_dim, seed).map_err(|e| Error::at(Stage::Clustering, e))?;
    let dir = out_dir(&args.out_dir)?;
    if let Some(dir) = dir {
        export(write_labels(&dir.join("labels.txt"), &result.labels))?;
    }
    match truth {
        Some(t) => {
            let metrics = evaluate(&result.labels, &t).map_err(|e| Error::at(Stage::Evaluation, e))?;
            let record = MetricsRecord { metrics, method: method.to_string(), seed: Some(seed), k };
            if let Some(dir) = dir {
                export(write_json(&dir.join("metrics.json"), &record))?;
            }
            print_json(&serde_json::to_value(&record).expect("serializable"));
        }
        None => print_json(&json!({ "method": method.to_string(), "seed": seed, "k": k, "labels": result.labels })),
    }
    Ok(())
}

fn cmd_evaluate(args: &EvaluateArgs) -> Result<(), Error> {
    let tag = |e: IoError| Error::at(Stage::Load, e);
    let pred_names = load_labels(&args.pred).map_err(tag)?;
    let pred = ClassLabels::from_names(&pred_names);
    let truth = truth_ids(&args.labels, pred.len())?;
    let metrics = evaluate(pred.ids(), &truth).map_err(|e| Error::at(Stage::Evaluation, e))?;
    let record = MetricsRecord { metrics, method: "external".into(), seed: None, k: pred.class_count() };
    if let Some(dir) = out_dir(&args.out_dir)? {
        export(write_json(&dir.join("metrics.json"), &record))?;
    }
    print_json(&serde_json::to_value(&record).expect("serializable"));
    Ok(())
}

fn cmd_pipeline(args: &DataCommand) -> Result<(), Error> {
    let cfg = build_config(&args.config)?;
    let x = load_data(&args.data, true)?;
    let dir = out_dir(&args.out_dir)?;
    let outcome = run_experiment(&cfg, &x, dir)?;
    let per_seed: Vec<&MetricsRecord> = outcome.seeds.iter().map(|s| &s.metrics).collect();
    let baselines: serde_json::Map<String, serde_json::Value> = outcome
        .baseline_means
        .iter()
        .map(|(kind, r)| (kind.to_string(), serde_json::to_value(r).expect("serializable")))
        .collect();
    print_json(&json!({
        "k": outcome.k,
        "input_checksum": outcome.input_checksum,
        "mean": outcome.mean,
        "seeds": per_seed,
        "baselines": baselines,
    }));
    Ok(())
}

fn cmd_scatter(args: &ScatterArgs) -> Result<(), Error> {
    let coords = match (&args.distances, &args.coords) {
        (Some(path), _) => {
            let (d, _) = read_distance_matrix(path).map_err(|e| Error::at(Stage::Load, e))?;
            export_scatter(&d).map_err(|e| Error::at(Stage::Export, e))?
        }
        (None, Some(path)) => {
            let c = read_numeric_matrix(path, Delimiter::from_path(path)).map_err(|e| Error::at(Stage::Load, e))?;
            if c.ncols() != 2 {
                return Err(Error::at(
                    Stage::Load,
                    IoError::RaggedRows { row: 1, expected: 2, got: c.ncols() },
                ));
            }
            c
        }
        (None, None) => return Err(config_error("either --distances or --coords is required")),
    };
    let labels: Vec<String> = match &args.labels {
        Some(p) => load_labels(p).map_err(|e| Error::at(Stage::Load, e))?,
        None => (0..coords.nrows()).map(|i| i.to_string()).collect(),
    };
    let path = match (&args.out, out_dir(&args.out_dir)?) {
        (Some(p), _) => p.clone(),
        (None, Some(dir)) => dir.join("scatter.csv"),
        (None, None) => PathBuf::from("scatter.csv"),
    };
    write_scatter(&path, &coords, &labels).map_err(|e| match e {
        IoError::LabelLengthMismatch { .. } => Error::at(Stage::Load, e),
        other => Error::at(Stage::Export, other),
    })?;
    print_json(&json!({ "scatter": path.display().to_string(), "points": coords.nrows() }));
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Error> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(config_error("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| config_error(format!("thread pool: {e}")))?;
    }
    // a config-level thread count applies when the flag is absent
    let config_threads = |c: &ConfigArgs| -> Result<(), Error> {
        if cli.threads.is_none() {
            if let Some(n) = build_config(c)?.threads {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
        Ok(())
    };
    match &cli.command {
        Command::SampleScales(a) => cmd_sample_scales(a),
        Command::Embed(a) => config_threads(&a.config).and_then(|_| cmd_embed(a)),
        Command::Mgm(a) => config_threads(&a.config).and_then(|_| cmd_mgm(a)),
        Command::Cluster(a) => config_threads(&a.config).and_then(|_| cmd_cluster(a)),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Pipeline(a) => config_threads(&a.config).and_then(|_| cmd_pipeline(a)),
        Command::Scatter(a) => cmd_scatter(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let mut msg = e.to_string();
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                let s_text = s.to_string();
                if !msg.contains(&s_text) {
                    msg.push_str(": ");
                    msg.push_str(&s_text);
                }
                src = s.source();
            }
            eprintln!("error: {msg}");
            ExitCode::from(e.kind().exit_code() as u8)
        }
    }
}
