//! Distance functions between feature vectors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceMetric {
    #[default]
    Euclidean,
    /// `1 - cos(a, b)`, in `[0, 2]`.
    CosineDistance,
}

impl DistanceMetric {
    pub fn distance(self, a: &[f64], b: &[f64]) -> Result<f64> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.len(),
                actual: b.len(),
            });
        }
        match self {
            DistanceMetric::Euclidean => Ok(euclidean(a, b)),
            DistanceMetric::CosineDistance => cosine_distance(a, b),
        }
    }

    /// Checks a query can be used with this metric at all.
    pub(crate) fn validate(self, v: &[f64]) -> Result<()> {
        if self == DistanceMetric::CosineDistance && squared_norm(v) == 0.0 {
            return Err(Error::ZeroNorm);
        }
        Ok(())
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DistanceMetric::Euclidean => "euclidean",
            DistanceMetric::CosineDistance => "cosine-distance",
        }
    }
}

impl std::str::FromStr for DistanceMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(DistanceMetric::Euclidean),
            "cosine" | "cosine-distance" => Ok(DistanceMetric::CosineDistance),
            other => Err(Error::InvalidConfig(format!("unknown metric {other:?}"))),
        }
    }
}

/// Free-function form of [`DistanceMetric::distance`].
pub fn distance(a: &[f64], b: &[f64], metric: DistanceMetric) -> Result<f64> {
    metric.distance(a, b)
}

// Both kernels are bitwise symmetric: the per-coordinate terms and their
// summation order do not depend on argument order.
fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

fn squared_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn cosine_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    let na = squared_norm(a);
    let nb = squared_norm(b);
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let cos = (dot / (na * nb).sqrt()).clamp(-1.0, 1.0);
    Ok(1.0 - cos)
}
