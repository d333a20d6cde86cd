//! External clustering indices: ACC (Hungarian-matched), NMI, ARI, purity
//! and average purity.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{max_weight_assignment, ClusterError};

/// Cluster-by-class count table; labels are compacted in sorted order.
#[derive(Clone, Debug, PartialEq)]
pub struct Contingency {
    counts: Vec<Vec<u64>>,
    total: u64,
}

fn compact(labels: &[usize]) -> (Vec<usize>, usize) {
    let ids: BTreeMap<usize, usize> = labels
        .iter()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(i, l)| (l, i))
        .collect();
    (labels.iter().map(|l| ids[l]).collect(), ids.len())
}

impl Contingency {
    pub fn new(pred: &[usize], truth: &[usize]) -> Result<Self, ClusterError> {
        if pred.len() != truth.len() {
            return Err(ClusterError::LengthMismatch { pred: pred.len(), truth: truth.len() });
        }
        if pred.is_empty() {
            return Err(ClusterError::EmptyLabels);
        }
        let (p, kp) = compact(pred);
        let (t, kt) = compact(truth);
        let mut counts = vec![vec![0u64; kt]; kp];
        for (&a, &b) in p.iter().zip(&t) {
            counts[a][b] += 1;
        }
        Ok(Self { counts, total: pred.len() as u64 })
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    fn row_sums(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    fn col_sums(&self) -> Vec<u64> {
        let kt = self.counts[0].len();
        (0..kt).map(|c| self.counts.iter().map(|r| r[c]).sum()).collect()
    }
}

fn entropy(sizes: &[u64], total: f64) -> f64 {
    sizes
        .iter()
        .filter(|&&s| s > 0)
        .map(|&s| {
            let p = s as f64 / total;
            -p * p.ln()
        })
        .sum()
}

fn comb2(n: u64) -> f64 {
    (n as f64) * (n as f64 - 1.0) / 2.0
}

/// Fraction of samples on the best one-to-one cluster/class matching.
pub fn accuracy(pred: &[usize], truth: &[usize]) -> Result<f64, ClusterError> {
    let table = Contingency::new(pred, truth)?;
    let weights: Vec<Vec<i64>> = table.counts.iter().map(|r| r.iter().map(|&c| c as i64).collect()).collect();
    let (matched, _) = max_weight_assignment(&weights);
    Ok(matched as f64 / table.total as f64)
}

/// Mutual information over the geometric mean of the two entropies.
///
/// Two single-cluster partitions score 1; exactly one zero entropy scores 0.
pub fn normalized_mutual_information(pred: &[usize], truth: &[usize]) -> Result<f64, ClusterError> {
    let table = Contingency::new(pred, truth)?;
    let n = table.total as f64;
    let rows = table.row_sums();
    let cols = table.col_sums();
    let (hp, ht) = (entropy(&rows, n), entropy(&cols, n));
    if hp == 0.0 && ht == 0.0 {
        return Ok(1.0);
    }
    if hp == 0.0 || ht == 0.0 {
        return Ok(0.0);
    }
    let mut mi = 0.0;
    for (i, row) in table.counts.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c > 0 {
                let c = c as f64;
                mi += c / n * (c * n / (rows[i] as f64 * cols[j] as f64)).ln();
            }
        }
    }
    Ok((mi / (hp * ht).sqrt()).clamp(0.0, 1.0))
}

/// Hubert–Arabie adjusted Rand index.
pub fn adjusted_rand_index(pred: &[usize], truth: &[usize]) -> Result<f64, ClusterError> {
    let table = Contingency::new(pred, truth)?;
    let index: f64 = table.counts.iter().flatten().map(|&c| comb2(c)).sum();
    let a: f64 = table.row_sums().into_iter().map(comb2).sum();
    let b: f64 = table.col_sums().into_iter().map(comb2).sum();
    let pairs = comb2(table.total);
    let expected = if pairs > 0.0 { a * b / pairs } else { 0.0 };
    let max = 0.5 * (a + b);
    if max == expected {
        let identical = table.counts.iter().all(|r| r.iter().filter(|&&c| c > 0).count() == 1)
            && (0..table.counts[0].len()).all(|c| table.counts.iter().filter(|r| r[c] > 0).count() == 1);
        return Ok(if identical { 1.0 } else { 0.0 });
    }
    Ok((index - expected) / (max - expected))
}

/// Size-weighted majority fraction: `(1/M) Σ_clusters max_class overlap`.
pub fn purity(pred: &[usize], truth: &[usize]) -> Result<f64, ClusterError> {
    let table = Contingency::new(pred, truth)?;
    let majority: u64 = table.counts.iter().map(|r| *r.iter().max().expect("nonempty")).sum();
    Ok(majority as f64 / table.total as f64)
}

/// Unweighted mean over predicted clusters of the majority fraction.
pub fn avg_purity(pred: &[usize], truth: &[usize]) -> Result<f64, ClusterError> {
    let table = Contingency::new(pred, truth)?;
    let fractions: Vec<f64> = table
        .counts
        .iter()
        .map(|r| *r.iter().max().expect("nonempty") as f64 / r.iter().sum::<u64>() as f64)
        .collect();
    Ok(fractions.iter().sum::<f64>() / fractions.len() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub acc: f64,
    pub nmi: f64,
    pub ari: f64,
    pub purity: f64,
    pub avg_purity: f64,
}

/// Flat JSON record: the five metrics plus `method`, `seed` and `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    #[serde(flatten)]
    pub metrics: EvaluationReport,
    pub method: String,
    pub seed: Option<u64>,
    pub k: usize,
}

pub fn evaluate(pred: &[usize], truth: &[usize]) -> Result<EvaluationReport, ClusterError> {
    Ok(EvaluationReport {
        acc: accuracy(pred, truth)?,
        nmi: normalized_mutual_information(pred, truth)?,
        ari: adjusted_rand_index(pred, truth)?,
        purity: purity(pred, truth)?,
        avg_purity: avg_purity(pred, truth)?,
    })
}

/// Arithmetic mean of per-seed reports.
pub fn mean_report(reports: &[EvaluationReport]) -> Option<EvaluationReport> {
    if reports.is_empty() {
        return None;
    }
    let n = reports.len() as f64;
    let avg = |f: fn(&EvaluationReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
    Some(EvaluationReport {
        acc: avg(|r| r.acc),
        nmi: avg(|r| r.nmi),
        ari: avg(|r| r.ari),
        purity: avg(|r| r.purity),
        avg_purity: avg(|r| r.avg_purity),
    })
}
