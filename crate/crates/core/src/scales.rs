//! Power-law sampling of integer neighborhood scales.
//!
//! Raw samples `s̃_i = a + (b − a) t_iᵖ` with `t_i = i / (count − 1)` are
//! rounded half away from zero, clipped to `[a, b]` and deduplicated. An
//! exponent above 1 packs more scales near `a` (local structure), below 1
//! near `b` (global structure).

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScaleError {
    #[error("invalid scale sampling spec: {0}")]
    InvalidSpec(String),
    #[error("scale list must be nonempty and strictly increasing, got {0:?}")]
    NotIncreasing(Vec<usize>),
    #[error("density summary needs at least two scales")]
    TooFewScales,
}

/// Parameters of the power-law scale sampler.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleSamplingSpec {
    pub min: usize,
    pub max: usize,
    pub count: usize,
    pub power: f64,
}

impl ScaleSamplingSpec {
    pub fn new(min: usize, max: usize, count: usize, power: f64) -> Result<Self, ScaleError> {
        let spec = Self { min, max, count, power };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), ScaleError> {
        if self.min < 2 {
            return Err(ScaleError::InvalidSpec(format!("min = {} must be at least 2", self.min)));
        }
        if self.max <= self.min {
            return Err(ScaleError::InvalidSpec(format!(
                "max = {} must exceed min = {}",
                self.max, self.min
            )));
        }
        if self.count < 2 {
            return Err(ScaleError::InvalidSpec(format!("count = {} must be at least 2", self.count)));
        }
        if !(self.power > 0.0 && self.power.is_finite()) {
            return Err(ScaleError::InvalidSpec(format!("power = {} must be positive", self.power)));
        }
        Ok(())
    }

    /// Real-valued samples before quantization.
    pub fn raw_samples(&self) -> Vec<f64> {
        let span = (self.max - self.min) as f64;
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| self.min as f64 + span * (i as f64 / last).powf(self.power))
            .collect()
    }
}

/// Ordered, strictly increasing set of integer scales.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleSet {
    scales: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    spec: Option<ScaleSamplingSpec>,
}

impl ScaleSet {
    /// Wraps an explicit list, which must be nonempty and strictly increasing.
    pub fn from_scales(scales: Vec<usize>) -> Result<Self, ScaleError> {
        if scales.is_empty() || scales.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ScaleError::NotIncreasing(scales));
        }
        Ok(Self { scales, spec: None })
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.scales
    }

    /// `p`, the number of distinct scales.
    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }

    /// The sampler parameters this set came from, if any.
    pub fn spec(&self) -> Option<&ScaleSamplingSpec> {
        self.spec.as_ref()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.scales.iter().copied()
    }
}

/// Rounds half away from zero (`f64::round` semantics), clips, dedups, sorts.
pub fn sample_scales(spec: &ScaleSamplingSpec) -> Result<ScaleSet, ScaleError> {
    spec.validate()?;
    let mut scales: Vec<usize> = spec
        .raw_samples()
        .into_iter()
        .map(|s| (s.round() as usize).clamp(spec.min, spec.max))
        .collect();
    scales.sort_unstable();
    scales.dedup();
    Ok(ScaleSet { scales, spec: Some(*spec) })
}

/// Gap statistics for a scale set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensitySummary {
    pub gaps: Vec<usize>,
    pub min_gap: usize,
    pub max_gap: usize,
    pub mean_gap: f64,
    /// Consecutive differences of the unrounded samples, when the set was sampled.
    pub raw_gaps: Option<Vec<f64>>,
}

impl DensitySummary {
    pub fn first_raw_gap(&self) -> Option<f64> {
        self.raw_gaps.as_ref().and_then(|g| g.first().copied())
    }

    pub fn last_raw_gap(&self) -> Option<f64> {
        self.raw_gaps.as_ref().and_then(|g| g.last().copied())
    }
}

pub fn describe_density(set: &ScaleSet) -> Result<DensitySummary, ScaleError> {
    if set.len() < 2 {
        return Err(ScaleError::TooFewScales);
    }
    let gaps: Vec<usize> = set.scales.windows(2).map(|w| w[1] - w[0]).collect();
    let min_gap = *gaps.iter().min().expect("nonempty");
    let max_gap = *gaps.iter().max().expect("nonempty");
    let mean_gap = gaps.iter().sum::<usize>() as f64 / gaps.len() as f64;
    let raw_gaps = set.spec.map(|spec| {
        spec.raw_samples().windows(2).map(|w| w[1] - w[0]).collect()
    });
    Ok(DensitySummary { gaps, min_gap, max_gap, mean_gap, raw_gaps })
}
