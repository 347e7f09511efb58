//! Open-set prediction with thresholded rejection.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitting::EvmModel;
use crate::sample::Label;

/// A known class or the rejection outcome.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Decision {
    Known(Label),
    Unknown,
}

impl Decision {
    pub fn is_unknown(&self) -> bool {
        matches!(self, Decision::Unknown)
    }

    pub fn known(&self) -> Option<&Label> {
        match self {
            Decision::Known(l) => Some(l),
            Decision::Unknown => None,
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Decision::Known(l) => write!(f, "{l}"),
            Decision::Unknown => f.write_str("unknown"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: Decision,
    /// Winning score; the maximum of `per_class_scores`, or 0 for an empty model.
    pub score: f64,
    /// Argmax class regardless of the rejection threshold.
    pub top_class: Option<Label>,
    pub per_class_scores: BTreeMap<Label, f64>,
}

impl Prediction {
    /// Builds a prediction from per-class scores. Ties go to the smallest label.
    pub fn from_scores(per_class_scores: BTreeMap<Label, f64>, accept: impl FnOnce(f64) -> bool) -> Self {
        let mut top: Option<(&Label, f64)> = None;
        for (label, &s) in &per_class_scores {
            if top.is_none_or(|(_, best)| s > best) {
                top = Some((label, s));
            }
        }
        let (top_class, score) = match top {
            Some((l, s)) => (Some(l.clone()), s),
            None => (None, 0.0),
        };
        let label = match &top_class {
            Some(l) if accept(score) => Decision::Known(l.clone()),
            _ => Decision::Unknown,
        };
        Self {
            label,
            score,
            top_class,
            per_class_scores,
        }
    }
}

impl EvmModel {
    /// Per-class maximum inclusion probability of `x`.
    pub fn class_scores(&self, x: &[f64]) -> Result<BTreeMap<Label, f64>> {
        if let Some(d) = self.dim {
            if d != x.len() {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual: x.len(),
                });
            }
        }
        let metric = self.config.metric;
        metric.validate(x)?;
        let mut scores = BTreeMap::new();
        for (label, class) in &self.classes {
            if class.evs.is_empty() {
                continue;
            }
            let mut best = 0.0f64;
            for ev in &class.evs {
                best = best.max(ev.psi(x, metric)?);
            }
            scores.insert(label.clone(), best);
        }
        Ok(scores)
    }

    /// Predicts with the model's configured rejection threshold.
    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        self.predict_with_threshold(x, self.config.rejection_threshold)
    }

    /// `x` is assigned the argmax class if its score reaches `delta`,
    /// otherwise it is rejected as unknown.
    pub fn predict_with_threshold(&self, x: &[f64], delta: f64) -> Result<Prediction> {
        let scores = self.class_scores(x)?;
        Ok(Prediction::from_scores(scores, |s| s >= delta))
    }

    pub fn score_matrix(&self, queries: &[&[f64]]) -> Result<ScoreMatrix> {
        let classes: Vec<Label> = self
            .classes
            .iter()
            .filter(|(_, c)| !c.evs.is_empty())
            .map(|(l, _)| l.clone())
            .collect();
        let rows = queries
            .par_iter()
            .map(|q| {
                let scores = self.class_scores(q)?;
                Ok(classes.iter().map(|c| scores[c]).collect())
            })
            .collect::<Result<Vec<Vec<f64>>>>()?;
        Ok(ScoreMatrix { classes, rows })
    }
}

/// Free-function form of [`EvmModel::predict_with_threshold`].
pub fn predict(model: &EvmModel, x: &[f64], delta: f64) -> Result<Prediction> {
    model.predict_with_threshold(x, delta)
}

/// Row `q`, column `c`: maximum inclusion probability of query `q` over class `c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreMatrix {
    pub classes: Vec<Label>,
    pub rows: Vec<Vec<f64>>,
}

impl ScoreMatrix {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, query: usize, class: &Label) -> Option<f64> {
        let col = self.classes.iter().position(|c| c == class)?;
        self.rows.get(query).map(|r| r[col])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fitting::{batch_fit, EvmConfig};
    use crate::sample::LabeledSample;

    fn toy() -> EvmModel {
        let data: Vec<_> = [
            (0.0, 0.0, "a"),
            (0.3, 0.1, "a"),
            (0.1, 0.4, "a"),
            (4.0, 4.0, "b"),
            (4.2, 3.9, "b"),
            (3.8, 4.3, "b"),
        ]
        .iter()
        .map(|&(x, y, l)| LabeledSample::from_parts(vec![x, y], l).unwrap())
        .collect();
        batch_fit(
            &data,
            &EvmConfig {
                tail_size: 3,
                ..EvmConfig::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn anchor_query_scores_one() {
        let model = toy();
        let p = model.predict_with_threshold(&[4.2, 3.9], 1.0).unwrap();
        assert_eq!(p.label, Decision::Known(Label::new("b").unwrap()));
        assert_eq!(p.score, 1.0);
    }

    #[test]
    fn far_query_is_unknown() {
        let model = toy();
        let p = model.predict_with_threshold(&[1e6, -1e6], 1e-9).unwrap();
        assert!(p.label.is_unknown());
        assert!(p.score < 1e-9);
        assert!(p.top_class.is_some());
    }

    #[test]
    fn empty_model_rejects() {
        let model = EvmModel::new(EvmConfig::default()).unwrap();
        let p = model.predict(&[1.0]).unwrap();
        assert_eq!(p.label, Decision::Unknown);
        assert_eq!(p.score, 0.0);
        assert!(p.per_class_scores.is_empty());
    }

    #[test]
    fn dimension_mismatch_errors() {
        assert!(toy().predict(&[1.0]).is_err());
    }

    #[test]
    fn ties_prefer_smallest_label() {
        let mut scores = BTreeMap::new();
        scores.insert(Label::new("z").unwrap(), 0.7);
        scores.insert(Label::new("m").unwrap(), 0.7);
        let p = Prediction::from_scores(scores, |s| s >= 0.5);
        assert_eq!(p.label, Decision::Known(Label::new("m").unwrap()));
    }

    #[test]
    fn score_matrix_shapes() {
        let model = toy();
        let empty = model.score_matrix(&[]).unwrap();
        assert!(empty.is_empty());
        let m = model.score_matrix(&[&[0.0, 0.0]]).unwrap();
        assert_eq!(m.get(0, &Label::new("a").unwrap()), Some(1.0));
    }

    #[test]
    fn prediction_is_read_only() {
        let model = toy();
        let before = model.clone();
        for x in [[0.0, 0.0], [2.0, 2.0], [9.0, -3.0]] {
            model.predict(&x).unwrap();
        }
        assert_eq!(model, before);
    }
}
