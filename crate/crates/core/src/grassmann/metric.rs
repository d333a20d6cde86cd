use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{principal_angles, GrassmannError, PrincipalAngles, Subspace, ORTHOGONAL_SLACK};
use std::f64::consts::FRAC_PI_2;

/// The angle-based distances on the Grassmann manifold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrassmannMetric {
    /// `sqrt(Σ θ²)`, the arc length of the minimizing geodesic.
    Geodesic,
    /// `sqrt(Σ sin² θ)`.
    #[default]
    Chordal,
    /// `arccos(Π cos θ)`.
    FubiniStudy,
    /// `sqrt(Σ log(1 / cos² θ))`.
    Martin,
    /// `2 sqrt(Σ sin²(θ / 2))`.
    Procrustes,
}

impl GrassmannMetric {
    pub const ALL: [GrassmannMetric; 5] = [
        GrassmannMetric::Geodesic,
        GrassmannMetric::Chordal,
        GrassmannMetric::FubiniStudy,
        GrassmannMetric::Martin,
        GrassmannMetric::Procrustes,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GrassmannMetric::Geodesic => "geodesic",
            GrassmannMetric::Chordal => "chordal",
            GrassmannMetric::FubiniStudy => "fubini-study",
            GrassmannMetric::Martin => "martin",
            GrassmannMetric::Procrustes => "procrustes",
        }
    }

    /// Evaluates the metric on a list of principal angles.
    pub fn from_angles(self, angles: &PrincipalAngles) -> Result<f64, GrassmannError> {
        let theta = angles.as_slice();
        let value = match self {
            GrassmannMetric::Geodesic => theta.iter().map(|t| t * t).sum::<f64>().sqrt(),
            GrassmannMetric::Chordal => theta.iter().map(|t| t.sin().powi(2)).sum::<f64>().sqrt(),
            GrassmannMetric::FubiniStudy => {
                let prod: f64 = theta.iter().map(|t| t.cos()).product();
                prod.clamp(0.0, 1.0).acos()
            }
            GrassmannMetric::Martin => {
                if let Some(&t) = theta.iter().find(|&&t| t >= FRAC_PI_2 - ORTHOGONAL_SLACK) {
                    return Err(GrassmannError::MartinDivergent { angle: t });
                }
                theta.iter().map(|t| -2.0 * t.cos().ln()).sum::<f64>().max(0.0).sqrt()
            }
            GrassmannMetric::Procrustes => {
                2.0 * theta.iter().map(|t| (t / 2.0).sin().powi(2)).sum::<f64>().sqrt()
            }
        };
        Ok(value)
    }
}

impl PrincipalAngles {
    pub fn distance(&self, metric: GrassmannMetric) -> Result<f64, GrassmannError> {
        metric.from_angles(self)
    }
}

impl fmt::Display for GrassmannMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GrassmannMetric {
    type Err = GrassmannError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .trim()
            .chars()
            .filter(|c| !matches!(c, '-' | '_' | ' '))
            .map(|c| c.to_ascii_lowercase())
            .collect();
        match key.as_str() {
            "geodesic" => Ok(GrassmannMetric::Geodesic),
            "chordal" => Ok(GrassmannMetric::Chordal),
            "fubinistudy" => Ok(GrassmannMetric::FubiniStudy),
            "martin" => Ok(GrassmannMetric::Martin),
            "procrustes" => Ok(GrassmannMetric::Procrustes),
            _ => Err(GrassmannError::UnknownMetric(s.to_string())),
        }
    }
}

/// Distance between two subspaces of the same ambient space.
pub fn distance(x: &Subspace, y: &Subspace, metric: GrassmannMetric) -> Result<f64, GrassmannError> {
    principal_angles(x, y)?.distance(metric)
}
