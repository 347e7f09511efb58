//! Nearest-neighbor open-world baselines: OSNN and thresholded 1-NN.
//!
//! Both scan the stored samples linearly. Scores are mapped into `[0, 1]`
//! (higher is more confident) so they can be thresholded like EVM scores:
//! OSNN uses `1 - d1/d2`, TNN uses `1 / (1 + d)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::distance::DistanceMetric;
use crate::error::{Error, Result};
use crate::predict::{Decision, Prediction};
use crate::sample::{common_dim, Label, LabeledSample};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NnStore {
    pub samples: Vec<LabeledSample>,
    pub metric: DistanceMetric,
}

impl NnStore {
    pub fn new(metric: DistanceMetric) -> Self {
        Self {
            samples: Vec::new(),
            metric,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Appends a batch; there is no training step.
    pub fn partial_fit(&mut self, batch: &[LabeledSample]) -> Result<()> {
        let dim = self.samples.first().map(|s| s.dim());
        common_dim(batch, dim)?;
        self.samples.extend_from_slice(batch);
        Ok(())
    }

    /// Nearest distance per class, ties resolved by first occurrence.
    fn nearest_per_class(&self, x: &[f64]) -> Result<BTreeMap<&Label, f64>> {
        let mut best: BTreeMap<&Label, f64> = BTreeMap::new();
        for s in &self.samples {
            let d = self.metric.distance(&s.features, x)?;
            let entry = best.entry(&s.label).or_insert(f64::INFINITY);
            if d < *entry {
                *entry = d;
            }
        }
        Ok(best)
    }

    /// Global nearest neighbor, first occurrence wins ties.
    fn nearest(&self, x: &[f64]) -> Result<Option<(&LabeledSample, f64)>> {
        let mut best: Option<(&LabeledSample, f64)> = None;
        for s in &self.samples {
            let d = self.metric.distance(&s.features, x)?;
            if best.is_none_or(|(_, b)| d < b) {
                best = Some((s, d));
            }
        }
        Ok(best)
    }

    /// Ratio `d1 / d2` of the nearest distance to the nearest distance among
    /// other classes, with the winning class. `0/0` counts as 1.
    pub fn osnn_ratio(&self, x: &[f64]) -> Result<(Label, f64)> {
        let (winner, d1) = self
            .nearest(x)?
            .map(|(s, d)| (s.label.clone(), d))
            .ok_or(Error::TooFewClasses(0))?;
        let per_class = self.nearest_per_class(x)?;
        if per_class.len() < 2 {
            return Err(Error::TooFewClasses(per_class.len()));
        }
        let d2 = per_class
            .iter()
            .filter(|(l, _)| ***l != winner)
            .map(|(_, &d)| d)
            .fold(f64::INFINITY, f64::min);
        let ratio = if d2 == 0.0 { 1.0 } else { d1 / d2 };
        Ok((winner, ratio))
    }

    /// Open-set nearest neighbor with a distance-ratio rejection rule.
    pub fn osnn_predict(&self, x: &[f64], ratio_threshold: f64) -> Result<Prediction> {
        let (winner, ratio) = self.osnn_ratio(x)?;
        let per_class = self.nearest_per_class(x)?;
        // Score of class c: 1 - d_c / (nearest distance among classes other than c).
        let mut scores = BTreeMap::new();
        for (&label, &dc) in &per_class {
            let other = per_class
                .iter()
                .filter(|(l, _)| **l != label)
                .map(|(_, &d)| d)
                .fold(f64::INFINITY, f64::min);
            let r = if other == 0.0 { 1.0 } else { dc / other };
            scores.insert(label.clone(), (1.0 - r).max(0.0));
        }
        let score = 1.0 - ratio;
        let label = if ratio <= ratio_threshold {
            Decision::Known(winner.clone())
        } else {
            Decision::Unknown
        };
        Ok(Prediction {
            label,
            score,
            top_class: Some(winner),
            per_class_scores: scores,
        })
    }

    /// Thresholded 1-NN: the nearest class if within `distance_threshold`.
    pub fn tnn_predict(&self, x: &[f64], distance_threshold: f64) -> Result<Prediction> {
        let per_class = self.nearest_per_class(x)?;
        let nearest = self.nearest(x)?;
        let scores = per_class
            .into_iter()
            .map(|(l, d)| (l.clone(), 1.0 / (1.0 + d)))
            .collect();
        Ok(match nearest {
            None => Prediction {
                label: Decision::Unknown,
                score: 0.0,
                top_class: None,
                per_class_scores: scores,
            },
            Some((s, d)) => Prediction {
                label: if d <= distance_threshold {
                    Decision::Known(s.label.clone())
                } else {
                    Decision::Unknown
                },
                score: 1.0 / (1.0 + d),
                top_class: Some(s.label.clone()),
                per_class_scores: scores,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: f64, l: &str) -> LabeledSample {
        LabeledSample::from_parts(vec![v], l).unwrap()
    }

    fn line() -> NnStore {
        let mut store = NnStore::new(DistanceMetric::Euclidean);
        store
            .partial_fit(&[s(0.0, "a"), s(1.0, "a"), s(10.0, "b"), s(11.0, "b")])
            .unwrap();
        store
    }

    #[test]
    fn osnn_on_sample_is_confident() {
        let p = line().osnn_predict(&[1.0], 0.5).unwrap();
        assert_eq!(p.label, Decision::Known(Label::new("a").unwrap()));
        assert_eq!(p.score, 1.0);
    }

    #[test]
    fn osnn_equidistant_is_unknown() {
        let p = line().osnn_predict(&[5.5], 0.99).unwrap();
        assert!(p.label.is_unknown());
        assert_eq!(p.score, 0.0);
    }

    #[test]
    fn osnn_line_boundary() {
        // Nearest a at 1, nearest b at 10: known iff x <= 4 or x >= 7 at ratio 0.5.
        let store = line();
        for (x, expect_known) in [(2.0, true), (3.9, true), (4.0, true), (4.1, false), (6.0, false), (7.5, true)] {
            let (_, r) = store.osnn_ratio(&[x]).unwrap();
            let ratio = if x <= 5.5 { (x - 1.0) / (10.0 - x) } else { (10.0 - x) / (x - 1.0) };
            assert!((r - ratio).abs() < 1e-12);
            let p = store.osnn_predict(&[x], 0.5).unwrap();
            assert_eq!(!p.label.is_unknown(), expect_known, "x = {x}");
        }
    }

    #[test]
    fn osnn_needs_two_classes() {
        let mut store = NnStore::new(DistanceMetric::Euclidean);
        store.partial_fit(&[s(0.0, "a")]).unwrap();
        assert!(matches!(store.osnn_predict(&[0.0], 0.5), Err(Error::TooFewClasses(1))));
    }

    #[test]
    fn tnn_rules() {
        let store = line();
        let p = store.tnn_predict(&[10.0], 0.0).unwrap();
        assert_eq!(p.label, Decision::Known(Label::new("b").unwrap()));
        assert!(store.tnn_predict(&[10.5], 0.0).unwrap().label.is_unknown());
        let p = store.tnn_predict(&[10.5], f64::INFINITY).unwrap();
        assert_eq!(p.label, Decision::Known(Label::new("b").unwrap()));
    }

    #[test]
    fn append_semantics() {
        let mut store = NnStore::new(DistanceMetric::Euclidean);
        let batch = vec![s(0.0, "a"), s(1.0, "b")];
        store.partial_fit(&batch).unwrap();
        assert_eq!(store.samples, batch);
        store.partial_fit(&[]).unwrap();
        assert_eq!(store.samples, batch);
        assert!(store.partial_fit(&[LabeledSample::from_parts(vec![1.0, 2.0], "a").unwrap()]).is_err());
    }
}
