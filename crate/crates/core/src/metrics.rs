//! Detection and identification rate at a false accept rate (DIR@FAR).
//!
//! Thresholds are derived from the evaluated records: a record is accepted
//! when its score is `>= t`, and `t` is placed strictly above the first
//! unknown score that would push the false accept rate over the target.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::predict::{Decision, Prediction};
use crate::sample::Label;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    /// Ground truth: a known class or `Unknown`.
    pub true_label: Decision,
    /// Threshold-free argmax label.
    pub predicted_label: Decision,
    pub score: f64,
}

impl EvalRecord {
    pub fn new(true_label: Decision, predicted_label: Decision, score: f64) -> Self {
        Self {
            true_label,
            predicted_label,
            score,
        }
    }

    /// Record for a prediction, using its argmax class rather than its decision.
    pub fn from_prediction(true_label: Decision, p: &Prediction) -> Self {
        let predicted_label = match &p.top_class {
            Some(l) => Decision::Known(l.clone()),
            None => Decision::Unknown,
        };
        Self::new(true_label, predicted_label, p.score)
    }

    fn is_hit(&self, threshold: f64) -> bool {
        !self.true_label.is_unknown() && self.score >= threshold && self.predicted_label == self.true_label
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Averaging {
    #[default]
    Micro,
    Macro,
}

impl std::str::FromStr for Averaging {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "micro" => Ok(Self::Micro),
            "macro" => Ok(Self::Macro),
            other => Err(Error::InvalidConfig(format!("unknown averaging {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirFarResult {
    pub far_targets: Vec<f64>,
    pub thresholds: Vec<f64>,
    pub dir_values: Vec<f64>,
    /// Fraction of unknowns accepted at each threshold.
    pub far_achieved: Vec<f64>,
    pub averaging: Averaging,
}

fn check_far(far_target: f64) -> Result<()> {
    if far_target > 0.0 && far_target <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("FAR target must be in (0, 1], got {far_target}")))
    }
}

/// Smallest threshold whose false accept rate over the true unknowns is at
/// most `far_target`.
pub fn derive_threshold(records: &[EvalRecord], far_target: f64) -> Result<f64> {
    check_far(far_target)?;
    let mut unknown: Vec<f64> = records
        .iter()
        .filter(|r| r.true_label.is_unknown())
        .map(|r| r.score)
        .collect();
    if unknown.is_empty() {
        return Err(Error::NoUnknowns);
    }
    unknown.sort_by(|a, b| b.total_cmp(a));
    let u = unknown.len();
    // Largest m with m / U <= far_target, so m unknowns may pass.
    let mut m = (far_target * u as f64).floor() as usize;
    if m < u && (m + 1) as f64 / u as f64 <= far_target {
        m += 1;
    }
    if m >= u {
        return Ok(records.iter().map(|r| r.score).fold(f64::INFINITY, f64::min));
    }
    // Everything tied with the (m+1)-th score must be rejected as well.
    Ok(unknown[m].next_up())
}

fn far_at(records: &[EvalRecord], t: f64) -> f64 {
    let (mut n, mut passed) = (0usize, 0usize);
    for r in records.iter().filter(|r| r.true_label.is_unknown()) {
        n += 1;
        passed += usize::from(r.score >= t);
    }
    passed as f64 / n as f64
}

fn dir_at(records: &[EvalRecord], t: f64, averaging: Averaging) -> f64 {
    match averaging {
        Averaging::Micro => {
            let known = records.iter().filter(|r| !r.true_label.is_unknown()).count();
            let hits = records.iter().filter(|r| r.is_hit(t)).count();
            hits as f64 / known as f64
        }
        Averaging::Macro => {
            let mut per_class: BTreeMap<&Label, (usize, usize)> = BTreeMap::new();
            for r in records {
                if let Decision::Known(l) = &r.true_label {
                    let e = per_class.entry(l).or_default();
                    e.0 += 1;
                    e.1 += usize::from(r.is_hit(t));
                }
            }
            let sum: f64 = per_class.values().map(|&(n, h)| h as f64 / n as f64).sum();
            sum / per_class.len() as f64
        }
    }
}

pub fn dir_at_far(records: &[EvalRecord], far_targets: &[f64], averaging: Averaging) -> Result<DirFarResult> {
    if !records.iter().any(|r| !r.true_label.is_unknown()) {
        return Err(Error::NoKnowns);
    }
    let mut thresholds = Vec::with_capacity(far_targets.len());
    let mut dir_values = Vec::with_capacity(far_targets.len());
    let mut far_achieved = Vec::with_capacity(far_targets.len());
    for &far in far_targets {
        let t = derive_threshold(records, far)?;
        let achieved = far_at(records, t);
        assert!(achieved <= far, "achieved FAR {achieved} exceeds target {far}");
        thresholds.push(t);
        dir_values.push(dir_at(records, t, averaging));
        far_achieved.push(achieved);
    }
    Ok(DirFarResult {
        far_targets: far_targets.to_vec(),
        thresholds,
        dir_values,
        far_achieved,
        averaging,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionSummary {
    pub known_correct: usize,
    pub known_wrong: usize,
    pub known_rejected: usize,
    pub unknown_accepted: usize,
    pub unknown_rejected: usize,
}

impl ConfusionSummary {
    pub fn total(&self) -> usize {
        self.known_correct + self.known_wrong + self.known_rejected + self.unknown_accepted + self.unknown_rejected
    }
}

/// Partitions the records at acceptance threshold `threshold`.
pub fn confusion_summary(records: &[EvalRecord], threshold: f64) -> ConfusionSummary {
    let mut c = ConfusionSummary::default();
    for r in records {
        let accepted = r.score >= threshold && !r.predicted_label.is_unknown();
        match (&r.true_label, accepted) {
            (Decision::Unknown, true) => c.unknown_accepted += 1,
            (Decision::Unknown, false) => c.unknown_rejected += 1,
            (Decision::Known(_), false) => c.known_rejected += 1,
            (Decision::Known(_), true) if r.predicted_label == r.true_label => c.known_correct += 1,
            (Decision::Known(_), true) => c.known_wrong += 1,
        }
    }
    c
}
