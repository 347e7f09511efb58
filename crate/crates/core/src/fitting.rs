//! Batch and incremental fitting of extreme vectors.
//!
//! Every training sample becomes an anchor whose Weibull model is fitted on
//! the `tail_size` smallest distances to samples of other classes. The
//! largest retained raw distance (`max_tail_distance`) is the radius of a
//! sphere around the anchor: during a partial fit only extreme vectors with a
//! new negative strictly inside their sphere are re-estimated. Without model
//! reduction this produces exactly the model a full refit on all data would.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distance::DistanceMetric;
use crate::error::{Error, Result};
use crate::reduction::CoverageCache;
use crate::sample::{common_dim, FeatureVector, Label, LabeledSample};
use crate::weibull::{fit_weibull, WeibullParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvmConfig {
    /// Number of nearest negatives kept per anchor (tau).
    pub tail_size: usize,
    /// Multiplier applied to tail distances before fitting (alpha).
    pub distance_multiplier: f64,
    pub metric: DistanceMetric,
    /// Per-class extreme vector budget (K); `None` is unlimited.
    pub budget: Option<usize>,
    /// Minimum winning inclusion probability for a known-class decision (delta).
    pub rejection_threshold: f64,
    /// Coverage threshold of the classic set cover reduction (zeta).
    pub coverage_threshold: f64,
    /// Termination width of the bisection over zeta (epsilon).
    pub bisection_tolerance: f64,
}

impl Default for EvmConfig {
    fn default() -> Self {
        Self {
            tail_size: 75,
            distance_multiplier: 0.5,
            metric: DistanceMetric::Euclidean,
            budget: None,
            rejection_threshold: 0.5,
            coverage_threshold: 0.5,
            bisection_tolerance: 0.01,
        }
    }
}

impl EvmConfig {
    /// Image classification setting: tau = 75, alpha = 0.5, K = 10.
    pub fn image_classification_preset() -> Self {
        Self {
            budget: Some(10),
            ..Self::default()
        }
    }

    /// Face recognition setting: tau = 75, alpha = 0.5, one extreme vector per class.
    pub fn face_recognition_preset() -> Self {
        Self {
            budget: Some(1),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.tail_size < 1 {
            return bad("tail_size must be >= 1".into());
        }
        if !(self.distance_multiplier > 0.0 && self.distance_multiplier <= 1.0) {
            return bad(format!(
                "distance_multiplier must be in (0, 1], got {}",
                self.distance_multiplier
            ));
        }
        if !(self.rejection_threshold > 0.0 && self.rejection_threshold < 1.0) {
            return bad(format!(
                "rejection_threshold must be in (0, 1), got {}",
                self.rejection_threshold
            ));
        }
        if !(self.coverage_threshold > 0.0 && self.coverage_threshold < 1.0) {
            return bad(format!(
                "coverage_threshold must be in (0, 1), got {}",
                self.coverage_threshold
            ));
        }
        if !(self.bisection_tolerance > 0.0) {
            return bad(format!(
                "bisection_tolerance must be > 0, got {}",
                self.bisection_tolerance
            ));
        }
        if self.budget == Some(0) {
            return bad("budget must be >= 1".into());
        }
        Ok(())
    }
}

/// An anchor with its Weibull model and the raw tail it was fitted on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremeVector {
    pub anchor: FeatureVector,
    pub label: Label,
    pub params: WeibullParams,
    /// Smallest raw negative distances, ascending, at most `tail_size` long.
    pub tail: Vec<f64>,
}

impl ExtremeVector {
    /// Inclusion probability of `x` for this extreme vector's class.
    pub fn psi(&self, x: &[f64], metric: DistanceMetric) -> Result<f64> {
        Ok(self.params.psi(metric.distance(&self.anchor, x)?))
    }

    pub fn is_saturated(&self, tail_size: usize) -> bool {
        self.tail.len() >= tail_size
    }

    /// Whether a new negative at raw distance `d` forces a re-estimate.
    ///
    /// Unsaturated tails absorb every negative; saturated ones only those
    /// strictly inside the sphere of radius `max_tail_distance`.
    pub fn needs_update(&self, d: f64, tail_size: usize) -> bool {
        !self.is_saturated(tail_size) || d < self.params.max_tail_distance
    }
}

/// Builds an extreme vector from an unsorted list of raw negative distances.
fn build_ev(
    anchor: FeatureVector,
    label: Label,
    mut distances: Vec<f64>,
    config: &EvmConfig,
) -> Result<ExtremeVector> {
    if distances.is_empty() {
        return Err(Error::NoNegatives);
    }
    let tau = config.tail_size;
    if distances.len() > tau {
        distances.select_nth_unstable_by(tau - 1, f64::total_cmp);
        distances.truncate(tau);
    }
    distances.sort_unstable_by(f64::total_cmp);
    refit(anchor, label, distances, config)
}

fn refit(anchor: FeatureVector, label: Label, tail: Vec<f64>, config: &EvmConfig) -> Result<ExtremeVector> {
    let alpha = config.distance_multiplier;
    let scaled: Vec<f64> = tail.iter().map(|d| d * alpha).collect();
    let fit = fit_weibull(&scaled)?;
    let max_tail_distance = *tail.last().expect("tail is non-empty");
    Ok(ExtremeVector {
        anchor,
        label,
        params: WeibullParams {
            shape: fit.shape,
            scale: fit.scale,
            max_tail_distance,
        },
        tail,
    })
}

/// Fits one anchor against an explicit set of negatives.
pub fn fit_anchor(sample: &LabeledSample, negatives: &[LabeledSample], config: &EvmConfig) -> Result<ExtremeVector> {
    config.validate()?;
    if negatives.is_empty() {
        return Err(Error::NoNegatives);
    }
    let mut distances = Vec::with_capacity(negatives.len());
    for n in negatives {
        if n.label == sample.label {
            return Err(Error::PositiveAsNegative(n.label.to_string()));
        }
        distances.push(config.metric.distance(&sample.features, &n.features)?);
    }
    build_ev(sample.features.clone(), sample.label.clone(), distances, config)
}

/// Extreme vectors of one class plus their cached coverage sums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassModel {
    pub evs: Vec<ExtremeVector>,
    pub coverage: CoverageCache,
}

/// Work done by a fit call.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitStats {
    /// Extreme vectors present before the call.
    pub existing_evs: usize,
    /// Existing extreme vectors whose tail changed.
    pub flagged_evs: usize,
    pub new_evs: usize,
    pub weibull_refits: u64,
    pub distance_evals: u64,
}

impl FitStats {
    /// Fraction of existing extreme vectors that were re-estimated.
    pub fn update_ratio(&self) -> f64 {
        if self.existing_evs == 0 {
            0.0
        } else {
            self.flagged_evs as f64 / self.existing_evs as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvmModel {
    pub classes: BTreeMap<Label, ClassModel>,
    pub config: EvmConfig,
    pub epoch: u64,
    pub dim: Option<usize>,
}

impl EvmModel {
    /// An empty model; the first `partial_fit` must bring at least two classes.
    pub fn new(config: EvmConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            classes: BTreeMap::new(),
            config,
            epoch: 0,
            dim: None,
        })
    }

    pub fn ev_count(&self) -> usize {
        self.classes.values().map(|c| c.evs.len()).sum()
    }

    pub fn ev_counts(&self) -> BTreeMap<Label, usize> {
        self.classes
            .iter()
            .map(|(l, c)| (l.clone(), c.evs.len()))
            .collect()
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ev_count() == 0
    }

    pub fn extreme_vectors(&self) -> impl Iterator<Item = &ExtremeVector> {
        self.classes.values().flat_map(|c| c.evs.iter())
    }

    pub fn metric(&self) -> DistanceMetric {
        self.config.metric
    }

    fn check_batch(&self, batch: &[LabeledSample]) -> Result<()> {
        common_dim(batch, self.dim)?;
        for s in batch {
            self.config.metric.validate(&s.features)?;
        }
        let labels: BTreeSet<&Label> = self
            .classes
            .keys()
            .chain(batch.iter().map(|s| &s.label))
            .collect();
        if labels.len() < 2 {
            return Err(Error::TooFewClasses(labels.len()));
        }
        Ok(())
    }

    /// Incorporates a batch, re-estimating only affected extreme vectors.
    ///
    /// Existing extreme vectors gain the new negatives that fall inside their
    /// sphere (all of them while the tail is unsaturated) and are refitted
    /// once per call. Each batch sample becomes a new extreme vector fitted
    /// against the current anchors and batch samples of other classes.
    pub fn partial_fit(&mut self, batch: &[LabeledSample]) -> Result<FitStats> {
        self.check_batch(batch)?;
        let config = &self.config;
        let metric = config.metric;
        let tau = config.tail_size;

        let existing: Vec<(&Label, usize, &ExtremeVector)> = self
            .classes
            .iter()
            .flat_map(|(l, c)| c.evs.iter().enumerate().map(move |(i, ev)| (l, i, ev)))
            .collect();

        // Tail updates of existing extreme vectors.
        let updates: Vec<Result<Option<ExtremeVector>>> = existing
            .par_iter()
            .map(|&(label, _, ev)| {
                let mut inserted = Vec::new();
                for s in batch.iter().filter(|s| &s.label != label) {
                    let d = metric.distance(&ev.anchor, &s.features)?;
                    if ev.needs_update(d, tau) {
                        inserted.push(d);
                    }
                }
                if inserted.is_empty() {
                    return Ok(None);
                }
                let mut tail = ev.tail.clone();
                tail.extend(inserted);
                tail.sort_unstable_by(f64::total_cmp);
                tail.truncate(tau);
                refit(ev.anchor.clone(), ev.label.clone(), tail, config).map(Some)
            })
            .collect();

        let mut distance_evals: u64 = existing
            .iter()
            .map(|(label, _, _)| batch.iter().filter(|s| &s.label != *label).count() as u64)
            .sum();

        // New extreme vectors, fitted against the pre-update anchors.
        let new_evs: Vec<Result<ExtremeVector>> = batch
            .par_iter()
            .map(|s| {
                let mut distances = Vec::new();
                for &(label, _, ev) in &existing {
                    if label != &s.label {
                        distances.push(metric.distance(&s.features, &ev.anchor)?);
                    }
                }
                for other in batch.iter().filter(|o| o.label != s.label) {
                    distances.push(metric.distance(&s.features, &other.features)?);
                }
                build_ev(s.features.clone(), s.label.clone(), distances, config)
            })
            .collect();
        for s in batch {
            distance_evals += existing.iter().filter(|(l, _, _)| **l != s.label).count() as u64;
            distance_evals += batch.iter().filter(|o| o.label != s.label).count() as u64;
        }

        // Everything fallible is done; now mutate.
        let mut flagged: BTreeMap<Label, Vec<usize>> = BTreeMap::new();
        let mut replacements = Vec::new();
        for ((label, idx, _), update) in existing.iter().zip(updates) {
            if let Some(ev) = update? {
                flagged.entry((*label).clone()).or_default().push(*idx);
                replacements.push(((*label).clone(), *idx, ev));
            }
        }
        let new_evs = new_evs.into_iter().collect::<Result<Vec<_>>>()?;

        let existing_count = existing.len();
        let flagged_count = replacements.len();
        let old_lens: BTreeMap<Label, usize> = self
            .classes
            .iter()
            .map(|(l, c)| (l.clone(), c.evs.len()))
            .collect();
        for (label, idx, ev) in replacements {
            self.classes.get_mut(&label).expect("class exists").evs[idx] = ev;
        }
        let new_count = new_evs.len();
        for ev in new_evs {
            self.classes
                .entry(ev.label.clone())
                .or_insert_with(|| ClassModel {
                    evs: Vec::new(),
                    coverage: CoverageCache::default(),
                })
                .evs
                .push(ev);
        }

        // Extend cached coverage sums over the combined set.
        let no_refresh = Vec::new();
        for (label, class) in self.classes.iter_mut() {
            let n_old = old_lens.get(label).copied().unwrap_or(0);
            if n_old == class.evs.len() && !flagged.contains_key(label) {
                continue;
            }
            let refreshed = flagged.get(label).unwrap_or(&no_refresh);
            distance_evals += class.coverage.extend(&class.evs, n_old, refreshed, metric)?;
        }

        if self.dim.is_none() {
            self.dim = batch.first().map(|s| s.dim());
        }
        self.epoch += 1;
        Ok(FitStats {
            existing_evs: existing_count,
            flagged_evs: flagged_count,
            new_evs: new_count,
            weibull_refits: (flagged_count + new_count) as u64,
            distance_evals,
        })
    }

    /// Fraction of extreme vectors that `batch` would force to re-estimate.
    /// Does not modify the model.
    pub fn update_ratio(&self, batch: &[LabeledSample]) -> Result<f64> {
        let total = self.ev_count();
        if total == 0 {
            return Err(Error::EmptyModel);
        }
        common_dim(batch, self.dim)?;
        let metric = self.config.metric;
        let tau = self.config.tail_size;
        let flagged: usize = self
            .classes
            .par_iter()
            .map(|(label, class)| {
                let mut count = 0;
                for ev in &class.evs {
                    for s in batch.iter().filter(|s| &s.label != label) {
                        if ev.needs_update(metric.distance(&ev.anchor, &s.features)?, tau) {
                            count += 1;
                            break;
                        }
                    }
                }
                Ok(count)
            })
            .collect::<Result<Vec<usize>>>()?
            .into_iter()
            .sum();
        Ok(flagged as f64 / total as f64)
    }
}

/// Fits a model on all of `data` from scratch.
pub fn batch_fit(data: &[LabeledSample], config: &EvmConfig) -> Result<EvmModel> {
    batch_fit_with_stats(data, config).map(|(m, _)| m)
}

pub fn batch_fit_with_stats(data: &[LabeledSample], config: &EvmConfig) -> Result<(EvmModel, FitStats)> {
    config.validate()?;
    let dim = common_dim(data, None)?;
    for s in data {
        config.metric.validate(&s.features)?;
    }
    let labels: BTreeSet<&Label> = data.iter().map(|s| &s.label).collect();
    if labels.len() < 2 {
        return Err(Error::TooFewClasses(labels.len()));
    }
    let metric = config.metric;

    let evs = data
        .par_iter()
        .map(|s| {
            let mut distances = Vec::new();
            for other in data.iter().filter(|o| o.label != s.label) {
                distances.push(metric.distance(&s.features, &other.features)?);
            }
            build_ev(s.features.clone(), s.label.clone(), distances, config)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut distance_evals: u64 = data
        .iter()
        .map(|s| data.iter().filter(|o| o.label != s.label).count() as u64)
        .sum();

    let mut classes: BTreeMap<Label, ClassModel> = BTreeMap::new();
    for ev in evs {
        classes
            .entry(ev.label.clone())
            .or_insert_with(|| ClassModel {
                evs: Vec::new(),
                coverage: CoverageCache::default(),
            })
            .evs
            .push(ev);
    }
    for class in classes.values_mut() {
        let (cache, evals) = CoverageCache::from_scratch(&class.evs, metric)?;
        class.coverage = cache;
        distance_evals += evals;
    }

    let stats = FitStats {
        existing_evs: 0,
        flagged_evs: 0,
        new_evs: data.len(),
        weibull_refits: data.len() as u64,
        distance_evals,
    };
    Ok((
        EvmModel {
            classes,
            config: config.clone(),
            epoch: 0,
            dim,
        },
        stats,
    ))
}
