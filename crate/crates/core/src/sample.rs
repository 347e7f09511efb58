//! Feature vectors, class labels and labeled samples.

use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point in feature space. All entries are finite and the dimension is at least one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyFeatureVector);
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteFeature(pos));
        }
        Ok(Self(values))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for FeatureVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for FeatureVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<FeatureVector> for Vec<f64> {
    fn from(v: FeatureVector) -> Self {
        v.0
    }
}

/// Opaque class identifier. Cheap to clone; ordered lexicographically.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Label(Arc<str>);

impl Label {
    pub fn new(name: impl AsRef<str>) -> Result<Self> {
        let name = name.as_ref();
        if name.is_empty() {
            return Err(Error::EmptyLabel);
        }
        Ok(Self(Arc::from(name)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(&*self.0, f)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for Label {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        Self::new(s)
    }
}

impl From<Label> for String {
    fn from(l: Label) -> Self {
        l.0.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub features: FeatureVector,
    pub label: Label,
}

impl LabeledSample {
    pub fn new(features: FeatureVector, label: Label) -> Self {
        Self { features, label }
    }

    /// Convenience constructor used heavily by tests and examples.
    pub fn from_parts(values: Vec<f64>, label: &str) -> Result<Self> {
        Ok(Self {
            features: FeatureVector::new(values)?,
            label: Label::new(label)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.features.dim()
    }
}

/// Checks that every sample shares one dimension and returns it.
pub(crate) fn common_dim(samples: &[LabeledSample], expected: Option<usize>) -> Result<Option<usize>> {
    let mut dim = expected;
    for s in samples {
        match dim {
            None => dim = Some(s.dim()),
            Some(d) if d != s.dim() => {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual: s.dim(),
                })
            }
            _ => {}
        }
    }
    Ok(dim)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_and_empty() {
        assert!(matches!(FeatureVector::new(vec![]), Err(Error::EmptyFeatureVector)));
        assert!(matches!(
            FeatureVector::new(vec![1.0, f64::NAN]),
            Err(Error::NonFiniteFeature(1))
        ));
        assert!(matches!(Label::new(""), Err(Error::EmptyLabel)));
    }

    #[test]
    fn serde_validates() {
        let bad: std::result::Result<FeatureVector, _> = serde_json::from_str("[]");
        assert!(bad.is_err());
        let s = LabeledSample::from_parts(vec![1.0, 2.0], "a").unwrap();
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, r#"{"features":[1.0,2.0],"label":"a"}"#);
        let back: LabeledSample = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn common_dim_detects_mismatch() {
        let a = LabeledSample::from_parts(vec![1.0, 2.0], "a").unwrap();
        let b = LabeledSample::from_parts(vec![1.0], "b").unwrap();
        assert_eq!(common_dim(&[a.clone()], None).unwrap(), Some(2));
        assert!(common_dim(&[a, b], None).is_err());
    }
}
