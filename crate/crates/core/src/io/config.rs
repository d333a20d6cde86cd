//! Flat `key = value` run configuration with named presets.
//!
//! ```text
//! preset = setup2-small
//! cluster.k = 3
//! run.seeds = 1,3,5,7,9
//! ```
//!
//! A `preset` line is applied first wherever it appears; the remaining keys
//! override it in file order.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{IoError, PreprocessOptions};
use crate::cluster::ClusteringMethod;
use crate::grassmann::{GrassmannMetric, DEFAULT_RANK_TOL};
use crate::mdr::{MdrBackendSpec, MdrMethod};
use crate::pipeline::{MgmConfig, SubspaceOptions};
use crate::scales::ScaleSamplingSpec;

pub const PRESET_NAMES: [&str; 5] = ["setup1", "setup1-tiny", "setup2-small", "setup2-large", "setup2-tiny"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusteringConfig {
    pub method: ClusteringMethod,
    /// Defaults to the number of label classes.
    pub k: Option<usize>,
    /// MDS dimension for `kmeans-mds`; defaults to `k`.
    pub embed_dim: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub mgm: MgmConfig,
    pub preprocess: PreprocessOptions,
    pub clustering: ClusteringConfig,
    pub seeds: Vec<u64>,
    pub threads: Option<usize>,
    pub parallel_seeds: bool,
    pub baselines: bool,
    pub save_distance_matrix: bool,
}

fn base(pca: usize, dim: usize, scales: ScaleSamplingSpec, method: ClusteringMethod) -> PipelineConfig {
    PipelineConfig {
        mgm: MgmConfig {
            scales,
            pca_dim: Some(pca),
            embedding: MdrBackendSpec::laplacian(dim),
            metric: GrassmannMetric::Chordal,
            subspace: SubspaceOptions { normalize_columns: false, rank_tol: DEFAULT_RANK_TOL },
        },
        preprocess: PreprocessOptions::default(),
        clustering: ClusteringConfig { method, k: None, embed_dim: None },
        seeds: vec![1, 3, 5, 7, 9],
        threads: None,
        parallel_seeds: false,
        baselines: true,
        save_distance_matrix: false,
    }
}

fn spec(min: usize, max: usize, count: usize, power: f64) -> ScaleSamplingSpec {
    ScaleSamplingSpec { min, max, count, power }
}

/// Named parameter sets.
///
/// | preset | PCA | n | scales (min, max, count, power) | p | clustering |
/// |---|---|---|---|---|---|
/// | `setup1` | 200 | 100 | 5, 100, 25, 2.0 | 23 | spectral |
/// | `setup1-tiny` | 40 | 30 | 5, 40, 13, 2.0 | 12 | spectral |
/// | `setup2-small` | 50 | 20 | 5, 20, 11, 1.6 | 10 | k-means |
/// | `setup2-large` | 100 | 50 | 5, 50, 20, 1.6 | 19 | k-means |
/// | `setup2-tiny` | 20 | 15 | 5, 15, 9, 1.6 | 8 | k-means |
pub fn preset(name: &str) -> Option<PipelineConfig> {
    use ClusteringMethod::{KMeansOnMdsEmbedding as KMeans, SpectralPrecomputed as Spectral};
    let cfg = match name.trim().to_ascii_lowercase().as_str() {
        "setup1" => base(200, 100, spec(5, 100, 25, 2.0), Spectral),
        "setup1-tiny" => base(40, 30, spec(5, 40, 13, 2.0), Spectral),
        "setup2-small" => base(50, 20, spec(5, 20, 11, 1.6), KMeans),
        "setup2-large" => base(100, 50, spec(5, 50, 20, 1.6), KMeans),
        "setup2-tiny" => base(20, 15, spec(5, 15, 9, 1.6), KMeans),
        _ => return None,
    };
    Some(cfg)
}

impl Default for PipelineConfig {
    fn default() -> Self {
        preset("setup2-small").expect("built-in preset")
    }
}

fn bad(key: &str, value: &str) -> IoError {
    IoError::Config(format!("invalid value '{value}' for key '{key}'"))
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, IoError> {
    value.trim().parse().map_err(|_| bad(key, value))
}

fn parse_opt<T: FromStr>(key: &str, value: &str) -> Result<Option<T>, IoError> {
    if value.trim().eq_ignore_ascii_case("none") || value.trim().is_empty() {
        Ok(None)
    } else {
        parse(key, value).map(Some)
    }
}

fn parse_bool(key: &str, value: &str) -> Result<bool, IoError> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(bad(key, value)),
    }
}

fn opt_str<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "none".to_string(), ToString::to_string)
}

impl PipelineConfig {
    /// Sets one dotted key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), IoError> {
        let key = key.trim();
        let v = value.trim();
        match key {
            "preset" => {
                *self = preset(v).ok_or_else(|| IoError::Config(format!("unknown preset '{v}'")))?;
            }
            "scales.min" => self.mgm.scales.min = parse(key, v)?,
            "scales.max" => self.mgm.scales.max = parse(key, v)?,
            "scales.count" => self.mgm.scales.count = parse(key, v)?,
            "scales.power" => self.mgm.scales.power = parse(key, v)?,
            "pca.dim" => self.mgm.pca_dim = parse_opt(key, v)?,
            "embedding.method" => {
                self.mgm.embedding.method = v.parse::<MdrMethod>().map_err(|_| bad(key, v))?;
            }
            "embedding.dim" => self.mgm.embedding.embedding_dim = parse(key, v)?,
            "embedding.external_pattern" => self.mgm.embedding.external_pattern = parse_opt(key, v)?,
            "grassmann.metric" => self.mgm.metric = v.parse::<GrassmannMetric>().map_err(|_| bad(key, v))?,
            "grassmann.normalize_columns" => self.mgm.subspace.normalize_columns = parse_bool(key, v)?,
            "grassmann.rank_tol" => self.mgm.subspace.rank_tol = parse(key, v)?,
            "cluster.method" => {
                self.clustering.method = v.parse::<ClusteringMethod>().map_err(|_| bad(key, v))?;
            }
            "cluster.k" => self.clustering.k = parse_opt(key, v)?,
            "cluster.embed_dim" => self.clustering.embed_dim = parse_opt(key, v)?,
            "preprocess.normalize" => self.preprocess.normalize_total = parse_bool(key, v)?,
            "preprocess.log1p" => self.preprocess.log1p = parse_bool(key, v)?,
            "preprocess.top_features" => self.preprocess.top_features = parse_opt(key, v)?,
            "run.seeds" => {
                self.seeds = v
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| parse(key, s))
                    .collect::<Result<_, _>>()?;
            }
            "run.threads" => self.threads = parse_opt(key, v)?,
            "run.parallel_seeds" => self.parallel_seeds = parse_bool(key, v)?,
            "run.baselines" => self.baselines = parse_bool(key, v)?,
            "run.save_distance_matrix" => self.save_distance_matrix = parse_bool(key, v)?,
            _ => return Err(IoError::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Parses the flat text format on top of the defaults.
    pub fn parse_str(text: &str) -> Result<Self, IoError> {
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| IoError::Config(format!("line {}: expected 'key = value'", i + 1)))?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        let mut cfg = PipelineConfig::default();
        if let Some((_, name)) = pairs.iter().rev().find(|(k, _)| k == "preset") {
            cfg.set("preset", name)?;
        }
        for (k, v) in pairs.iter().filter(|(k, _)| k != "preset") {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, IoError> {
        let text = std::fs::read_to_string(path).map_err(|e| IoError::file(path, e))?;
        Self::parse_str(&text)
    }

    /// Every key, one per line, in a fixed order.
    pub fn to_flat_string(&self) -> String {
        let s = &self.mgm.scales;
        let seeds: Vec<String> = self.seeds.iter().map(u64::to_string).collect();
        let entries: [(&str, String); 22] = [
            ("scales.min", s.min.to_string()),
            ("scales.max", s.max.to_string()),
            ("scales.count", s.count.to_string()),
            ("scales.power", s.power.to_string()),
            ("pca.dim", opt_str(&self.mgm.pca_dim)),
            ("embedding.method", self.mgm.embedding.method.to_string()),
            ("embedding.dim", self.mgm.embedding.embedding_dim.to_string()),
            ("embedding.external_pattern", opt_str(&self.mgm.embedding.external_pattern)),
            ("grassmann.metric", self.mgm.metric.to_string()),
            ("grassmann.normalize_columns", self.mgm.subspace.normalize_columns.to_string()),
            ("grassmann.rank_tol", self.mgm.subspace.rank_tol.to_string()),
            ("cluster.method", self.clustering.method.to_string()),
            ("cluster.k", opt_str(&self.clustering.k)),
            ("cluster.embed_dim", opt_str(&self.clustering.embed_dim)),
            ("preprocess.normalize", self.preprocess.normalize_total.to_string()),
            ("preprocess.log1p", self.preprocess.log1p.to_string()),
            ("preprocess.top_features", opt_str(&self.preprocess.top_features)),
            ("run.seeds", seeds.join(",")),
            ("run.threads", opt_str(&self.threads)),
            ("run.parallel_seeds", self.parallel_seeds.to_string()),
            ("run.baselines", self.baselines.to_string()),
            ("run.save_distance_matrix", self.save_distance_matrix.to_string()),
        ];
        let mut out = String::new();
        for (k, v) in entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    pub fn validate(&self) -> Result<(), IoError> {
        self.mgm.scales.validate().map_err(|e| IoError::Config(e.to_string()))?;
        if self.mgm.embedding.embedding_dim < 2 {
            return Err(IoError::Config("embedding.dim must be at least 2".into()));
        }
        if self.mgm.embedding.method == MdrMethod::External {
            match &self.mgm.embedding.external_pattern {
                Some(p) if p.contains("{scale}") => {}
                _ => return Err(IoError::Config("embedding.external_pattern must contain '{scale}'".into())),
            }
        }
        if self.mgm.pca_dim == Some(0) {
            return Err(IoError::Config("pca.dim must be positive".into()));
        }
        if !(self.mgm.subspace.rank_tol > 0.0 && self.mgm.subspace.rank_tol < 1.0) {
            return Err(IoError::Config("grassmann.rank_tol must lie in (0, 1)".into()));
        }
        if self.clustering.k == Some(0) {
            return Err(IoError::Config("cluster.k must be at least 1".into()));
        }
        if self.clustering.method == ClusteringMethod::KMeansEuclidean {
            return Err(IoError::Config(
                "cluster.method for distance matrices must be 'spectral' or 'kmeans-mds'".into(),
            ));
        }
        if self.seeds.is_empty() {
            return Err(IoError::Config("run.seeds must list at least one seed".into()));
        }
        if self.threads == Some(0) {
            return Err(IoError::Config("run.threads must be positive".into()));
        }
        Ok(())
    }
}
