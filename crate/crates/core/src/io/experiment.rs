//! Multi-seed experiment harness: MGM representation, clustering,
//! evaluation and baselines, with per-seed result directories.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::export::{write_distance_matrix, write_json, write_labels, DistanceMeta};
use super::{preprocess, ExpressionMatrix, IoError, PipelineConfig};
use crate::cluster::{
    cluster_distances, euclidean_distances, evaluate, kmeans_euclidean, mean_report, ClusterError, ClusteringMethod,
    ClusteringResult, EvaluationReport, MetricsRecord,
};
use crate::error::Stage;
use crate::mdr::pca_reduce;
use crate::pipeline::{run_mgm, RunReport};
use crate::{Error, Matrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineKind {
    /// The PCA coordinates alone.
    Pca,
    /// The MDR embeddings averaged over all scales.
    AveragedEmbedding,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 2] = [BaselineKind::Pca, BaselineKind::AveragedEmbedding];

    pub fn name(self) -> &'static str {
        match self {
            BaselineKind::Pca => "pca",
            BaselineKind::AveragedEmbedding => "avg-embedding",
        }
    }
}

impl fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineOutcome {
    pub kind: BaselineKind,
    pub metrics: MetricsRecord,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedOutcome {
    pub seed: u64,
    pub metrics: MetricsRecord,
    pub labels: Vec<usize>,
    pub baselines: Vec<BaselineOutcome>,
    pub report: RunReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutcome {
    pub k: usize,
    /// SHA-256 of the preprocessed matrix shared by MGM and the baselines.
    pub input_checksum: String,
    pub seeds: Vec<SeedOutcome>,
    pub mean: EvaluationReport,
    pub baseline_means: Vec<(BaselineKind, EvaluationReport)>,
}

#[derive(Serialize)]
struct MeanRecord<'a> {
    #[serde(flatten)]
    metrics: EvaluationReport,
    method: &'a str,
    seeds: Vec<u64>,
    k: usize,
}

#[derive(Serialize)]
struct Summary<'a> {
    input_checksum: &'a str,
    cells: usize,
    features: usize,
    k: usize,
    completed_seeds: Vec<u64>,
    failed_seed: Option<(u64, String)>,
    mean: Option<MeanRecord<'a>>,
    baselines: Vec<MeanRecord<'a>>,
}

fn method_label(prefix: &str, method: ClusteringMethod) -> String {
    format!("{prefix}+{method}")
}

/// Clusters coordinates with the family configured for `D`: spectral on
/// their Euclidean distances, or k-means directly on them.
fn cluster_points(points: &Matrix, method: ClusteringMethod, k: usize, seed: u64) -> Result<ClusteringResult, ClusterError> {
    match method {
        ClusteringMethod::SpectralPrecomputed => cluster_distances(&euclidean_distances(points), method, k, None, seed),
        _ => kmeans_euclidean(points, k, seed),
    }
}

fn record(result: &ClusteringResult, truth: &[usize], method: String) -> Result<MetricsRecord, Error> {
    let metrics = evaluate(&result.labels, truth).map_err(|e| Error::at(Stage::Evaluation, e))?;
    Ok(MetricsRecord { metrics, method, seed: Some(result.seed), k: result.k })
}

fn run_seed(
    cfg: &PipelineConfig,
    x: &Matrix,
    truth: &[usize],
    k: usize,
    seed: u64,
    out_dir: Option<&Path>,
) -> Result<SeedOutcome, Error> {
    let out = run_mgm(x, &cfg.mgm, seed)?;
    let method = cfg.clustering.method;
    let result = cluster_distances(out.distances.values(), method, k, cfg.clustering.embed_dim, seed)
        .map_err(|e| Error::at(Stage::Clustering, e))?;
    let metrics = record(&result, truth, method_label("mgm", method))?;

    let mut baselines = Vec::new();
    if cfg.baselines {
        for kind in BaselineKind::ALL {
            let points = match kind {
                BaselineKind::Pca => {
                    let dim = cfg.mgm.pca_dim.unwrap_or(cfg.mgm.embedding.embedding_dim);
                    pca_reduce(x, dim.min(x.nrows()).min(x.ncols())).map_err(|e| Error::at(Stage::Pca, e))?
                }
                BaselineKind::AveragedEmbedding => out.stack.averaged(),
            };
            let res = cluster_points(&points, method, k, seed).map_err(|e| Error::at(Stage::Clustering, e))?;
            baselines.push(BaselineOutcome { kind, metrics: record(&res, truth, method_label(kind.name(), method))? });
        }
    }

    let outcome = SeedOutcome { seed, metrics, labels: result.labels, baselines, report: out.report };
    if let Some(dir) = out_dir {
        let dir = seed_dir(dir, seed);
        write_seed(&dir, &outcome).map_err(|e| Error::at(Stage::Export, e))?;
        if cfg.save_distance_matrix {
            let meta = DistanceMeta {
                metric: out.distances.metric(),
                n: outcome.report.embedding_dim,
                p: outcome.report.p,
                scales: outcome.report.scales.clone(),
                seed,
                cells: out.distances.size(),
            };
            write_distance_matrix(&dir.join("distance_matrix.csv"), &out.distances, &meta)
                .map_err(|e| Error::at(Stage::Export, e))?;
        }
    }
    Ok(outcome)
}

fn seed_dir(root: &Path, seed: u64) -> PathBuf {
    root.join(format!("seed_{seed}"))
}

fn write_seed(dir: &Path, s: &SeedOutcome) -> Result<(), IoError> {
    fs::create_dir_all(dir).map_err(|e| IoError::file(dir, e))?;
    write_json(&dir.join("metrics.json"), &s.metrics)?;
    write_labels(&dir.join("labels.txt"), &s.labels)?;
    write_json(&dir.join("run_report.json"), &s.report)?;
    if !s.baselines.is_empty() {
        let records: Vec<&MetricsRecord> = s.baselines.iter().map(|b| &b.metrics).collect();
        write_json(&dir.join("baselines.json"), &records)?;
    }
    Ok(())
}

fn means(done: &[SeedOutcome]) -> (Option<EvaluationReport>, Vec<(BaselineKind, EvaluationReport)>) {
    let mgm: Vec<EvaluationReport> = done.iter().map(|s| s.metrics.metrics).collect();
    let baselines = BaselineKind::ALL
        .iter()
        .filter_map(|&kind| {
            let reports: Vec<EvaluationReport> = done
                .iter()
                .filter_map(|s| s.baselines.iter().find(|b| b.kind == kind).map(|b| b.metrics.metrics))
                .collect();
            (reports.len() == done.len()).then(|| mean_report(&reports)).flatten().map(|r| (kind, r))
        })
        .collect();
    (mean_report(&mgm), baselines)
}

/// Runs every configured seed on the preprocessed data.
///
/// `data` must carry labels. With `out_dir` set, each seed's files are
/// written as soon as it finishes, followed by `mean_metrics.json`,
/// `summary.json` and `config.txt`. When a seed fails the completed seeds
/// stay on disk, the summary names the failure and the error is returned.
pub fn run_experiment(
    cfg: &PipelineConfig,
    data: &ExpressionMatrix,
    out_dir: Option<&Path>,
) -> Result<ExperimentOutcome, Error> {
    cfg.validate().map_err(|e| Error::at(Stage::Config, e))?;
    let labels = data
        .labels()
        .ok_or_else(|| Error::at(Stage::Load, IoError::Config("ground-truth labels are required".into())))?;
    let k = cfg.clustering.k.unwrap_or(labels.class_count());
    let truth = labels.ids().to_vec();
    let x = preprocess(data, &cfg.preprocess).map_err(|e| Error::at(Stage::Preprocess, e))?;
    let checksum = x.checksum();
    log::info!("input checksum {checksum} ({} cells x {} features)", x.sample_count(), x.feature_count());

    if let Some(dir) = out_dir {
        fs::create_dir_all(dir).map_err(|e| Error::at(Stage::Export, IoError::file(dir, e)))?;
        fs::write(dir.join("config.txt"), cfg.to_flat_string())
            .map_err(|e| Error::at(Stage::Export, IoError::file(dir, e)))?;
    }

    let values = x.values();
    let run = |&seed: &u64| run_seed(cfg, values, &truth, k, seed, out_dir);
    let results: Vec<Result<SeedOutcome, Error>> = if cfg.parallel_seeds {
        cfg.seeds.par_iter().map(run).collect()
    } else {
        let mut v = Vec::new();
        for seed in &cfg.seeds {
            let r = run(seed);
            let failed = r.is_err();
            v.push(r);
            if failed {
                break;
            }
        }
        v
    };

    let mut done = Vec::new();
    let mut failure = None;
    for (seed, r) in cfg.seeds.iter().zip(results) {
        match r {
            Ok(s) => done.push(s),
            Err(e) if failure.is_none() => failure = Some((*seed, e)),
            Err(_) => {}
        }
    }
    let (mean, baseline_means) = means(&done);
    let mgm_label = method_label("mgm", cfg.clustering.method);
    let baseline_labels: Vec<String> =
        baseline_means.iter().map(|(kind, _)| method_label(kind.name(), cfg.clustering.method)).collect();

    if let Some(dir) = out_dir {
        let completed: Vec<u64> = done.iter().map(|s| s.seed).collect();
        let mean_record = mean.map(|m| MeanRecord { metrics: m, method: &mgm_label, seeds: completed.clone(), k });
        let baselines = baseline_means
            .iter()
            .zip(&baseline_labels)
            .map(|((_, m), label)| MeanRecord { metrics: *m, method: label, seeds: completed.clone(), k })
            .collect();
        let export = |e| Error::at(Stage::Export, e);
        if let Some(m) = &mean_record {
            write_json(&dir.join("mean_metrics.json"), m).map_err(export)?;
        }
        let summary = Summary {
            input_checksum: &checksum,
            cells: x.sample_count(),
            features: x.feature_count(),
            k,
            completed_seeds: completed,
            failed_seed: failure.as_ref().map(|(s, e)| (*s, e.to_string())),
            mean: mean_record,
            baselines,
        };
        write_json(&dir.join("summary.json"), &summary).map_err(export)?;
    }

    if let Some((_, e)) = failure {
        return Err(e);
    }
    Ok(ExperimentOutcome {
        k,
        input_checksum: checksum,
        mean: mean.expect("at least one seed"),
        seeds: done,
        baseline_means,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{preset, ClassLabels};
    use crate::mdr::MdrBackendSpec;
    use crate::scales::ScaleSamplingSpec;

    fn blobs() -> ExpressionMatrix {
        // three well separated groups of 8 cells in 6 features
        let mut values = Matrix::zeros(24, 6);
        let mut names = Vec::new();
        for i in 0..24 {
            let g = i / 8;
            for f in 0..6 {
                let jitter = ((i * 7 + f * 13) % 11) as f64 * 0.05;
                values[(i, f)] = 1.0 + jitter + if f / 2 == g { 20.0 } else { 0.0 };
            }
            names.push(format!("type{g}"));
        }
        ExpressionMatrix::new(values).unwrap().with_labels(ClassLabels::from_names(&names)).unwrap()
    }

    fn small_cfg() -> PipelineConfig {
        let mut cfg = preset("setup1").unwrap();
        cfg.mgm.scales = ScaleSamplingSpec { min: 4, max: 10, count: 4, power: 1.0 };
        cfg.mgm.pca_dim = Some(5);
        cfg.mgm.embedding = MdrBackendSpec::laplacian(4);
        cfg.seeds = vec![1, 3];
        cfg
    }

    #[test]
    fn writes_per_seed_and_mean_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small_cfg();
        cfg.save_distance_matrix = true;
        let out = run_experiment(&cfg, &blobs(), Some(dir.path())).unwrap();
        assert_eq!(out.seeds.len(), 2);
        assert_eq!(out.k, 3);
        assert_eq!(out.baseline_means.len(), 2);
        for s in [1, 3] {
            let d = dir.path().join(format!("seed_{s}"));
            for f in ["metrics.json", "labels.txt", "run_report.json", "baselines.json", "distance_matrix.csv", "distance_matrix.meta.json"] {
                assert!(d.join(f).exists(), "{f}");
            }
        }
        assert!(dir.path().join("mean_metrics.json").exists());
        assert!(dir.path().join("summary.json").exists());
        let back = PipelineConfig::parse_str(&fs::read_to_string(dir.path().join("config.txt")).unwrap()).unwrap();
        assert_eq!(back, cfg);
        let mean_acc = (out.seeds[0].metrics.metrics.acc + out.seeds[1].metrics.metrics.acc) / 2.0;
        assert!((out.mean.acc - mean_acc).abs() < 1e-15);
    }

    #[test]
    fn k_one_is_degenerate_but_valid() {
        let mut cfg = small_cfg();
        cfg.seeds = vec![1];
        cfg.clustering.k = Some(1);
        let out = run_experiment(&cfg, &blobs(), None).unwrap();
        assert_eq!(out.mean.ari, 0.0);
        assert!(out.seeds[0].labels.iter().all(|&l| l == 0));
    }

    #[test]
    fn missing_labels_rejected() {
        let x = ExpressionMatrix::new(Matrix::from_element(5, 3, 1.0)).unwrap();
        assert!(run_experiment(&small_cfg(), &x, None).is_err());
    }

    #[test]
    fn parallel_seeds_match_sequential() {
        let mut cfg = small_cfg();
        let a = run_experiment(&cfg, &blobs(), None).unwrap();
        cfg.parallel_seeds = true;
        let b = run_experiment(&cfg, &blobs(), None).unwrap();
        for (x, y) in a.seeds.iter().zip(&b.seeds) {
            assert_eq!(x.metrics, y.metrics);
            assert_eq!(x.labels, y.labels);
        }
    }

    #[test]
    fn failure_keeps_completed_seeds() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small_cfg();
        cfg.mgm.scales = ScaleSamplingSpec { min: 4, max: 40, count: 4, power: 1.0 };
        let err = run_experiment(&cfg, &blobs(), Some(dir.path())).unwrap_err();
        assert_eq!(err.stage(), Some(Stage::Embedding));
        let summary = fs::read_to_string(dir.path().join("summary.json")).unwrap();
        assert!(summary.contains("failed_seed"));
    }
}
