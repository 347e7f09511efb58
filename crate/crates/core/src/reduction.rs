//! Budgeted model reduction.
//!
//! Three reductions are provided, all class-local:
//!
//! * [`reduce_wksc`]: weighted maximum K-set cover. Candidates are picked
//!   greedily by their summed outgoing inclusion probability `p[i] =
//!   sum_{j != i} Psi_i(x_j)`. After each pick the selected vector's
//!   incoming coverage `Psi_i(x_selected)` is subtracted from every remaining
//!   candidate, so a mutually covering pair is only counted once. The sums
//!   are cached across epochs in a [`CoverageCache`].
//! * [`reduce_set_cover`]: the classic thresholded greedy minimum set cover.
//! * [`reduce_set_cover_budget`]: the same, wrapped in a bisection over the
//!   coverage threshold until the result fits a budget.
//!
//! [`dbscan_centroids`] implements the clustering preconditioner used by the
//! clustered variants.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distance::DistanceMetric;
use crate::error::{Error, Result};
use crate::fitting::{ClassModel, EvmModel, ExtremeVector};
use crate::sample::{FeatureVector, Label, LabeledSample};

/// Lower end of the bisection bracket over the coverage threshold.
pub const ZETA_MIN: f64 = 1e-6;
/// Upper end of the bisection bracket over the coverage threshold.
pub const ZETA_MAX: f64 = 1.0 - 1e-6;

/// Cached coverage sums of one class, aligned with its extreme vectors.
///
/// `sums[i] = sum over j != i of Psi_i(x_j)`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CoverageCache {
    pub sums: Vec<f64>,
}

impl CoverageCache {
    /// Computes all sums directly. Returns the cache and the number of
    /// distance evaluations.
    pub fn from_scratch(evs: &[ExtremeVector], metric: DistanceMetric) -> Result<(Self, u64)> {
        let n = evs.len();
        let mut sums = vec![0.0; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = metric.distance(&evs[i].anchor, &evs[j].anchor)?;
                sums[i] += evs[i].params.psi(d);
                sums[j] += evs[j].params.psi(d);
            }
        }
        Ok((Self { sums }, (n * n.saturating_sub(1) / 2) as u64))
    }

    pub fn len(&self) -> usize {
        self.sums.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sums.is_empty()
    }

    /// Brings the cache in line with `evs`, where the first `n_old` entries
    /// were covered by the cache and the rest are new.
    ///
    /// Old sums gain the coverage of the new vectors; new vectors get full
    /// sums over the combined set. Old vectors listed in `refreshed` had
    /// their Weibull parameters re-estimated, so their whole row is
    /// recomputed. Returns the number of distance evaluations.
    pub fn extend(
        &mut self,
        evs: &[ExtremeVector],
        n_old: usize,
        refreshed: &[usize],
        metric: DistanceMetric,
    ) -> Result<u64> {
        if self.sums.len() != n_old || n_old > evs.len() {
            return Err(Error::Corrupt(format!(
                "coverage cache has {} entries, expected {n_old}",
                self.sums.len()
            )));
        }
        let n = evs.len();
        let mut evals = 0u64;

        // Distances from every new vector to every vector.
        let new_rows: Vec<Vec<f64>> = (n_old..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if j == i {
                            Ok(0.0)
                        } else {
                            metric.distance(&evs[i].anchor, &evs[j].anchor)
                        }
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<_>>()?;
        evals += ((n - n_old) * n.saturating_sub(1)) as u64;

        let mut is_refreshed = vec![false; n_old];
        for &r in refreshed {
            if r >= n_old {
                return Err(Error::Corrupt(format!("refreshed index {r} out of range")));
            }
            is_refreshed[r] = true;
        }

        for e in 0..n_old {
            if is_refreshed[e] {
                let mut sum = 0.0;
                for j in 0..n {
                    if j == e {
                        continue;
                    }
                    let d = if j >= n_old {
                        new_rows[j - n_old][e]
                    } else {
                        evals += 1;
                        metric.distance(&evs[e].anchor, &evs[j].anchor)?
                    };
                    sum += evs[e].params.psi(d);
                }
                self.sums[e] = sum;
            } else {
                let gain: f64 = new_rows.iter().map(|row| evs[e].params.psi(row[e])).sum();
                self.sums[e] += gain;
            }
        }
        for (offset, row) in new_rows.iter().enumerate() {
            let i = n_old + offset;
            let sum = (0..n)
                .filter(|&j| j != i)
                .map(|j| evs[i].params.psi(row[j]))
                .sum();
            self.sums.push(sum);
        }
        Ok(evals)
    }
}

/// Instrumentation for reductions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionStats {
    /// Extreme vectors picked by a greedy loop.
    pub greedy_selections: u64,
    pub bisection_iterations: u64,
    /// Full greedy set cover passes, one per coverage threshold tried.
    pub coverage_threshold_evals: u64,
    pub distance_evals: u64,
}

impl std::ops::AddAssign for ReductionStats {
    fn add_assign(&mut self, o: Self) {
        self.greedy_selections += o.greedy_selections;
        self.bisection_iterations += o.bisection_iterations;
        self.coverage_threshold_evals += o.coverage_threshold_evals;
        self.distance_evals += o.distance_evals;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WkscReduction {
    /// Indices into the candidates, in selection order.
    pub kept: Vec<usize>,
    /// Coverage sums over the kept vectors, aligned with `kept`.
    pub cache: CoverageCache,
    pub stats: ReductionStats,
}

/// Greedy weighted maximum K-set cover with bilateral coverage regularization.
///
/// `cache` must hold the coverage sums over all `candidates`. Ties in the
/// argmax go to the lowest candidate index.
pub fn reduce_wksc(
    candidates: &[ExtremeVector],
    cache: &CoverageCache,
    k: usize,
    metric: DistanceMetric,
) -> Result<WkscReduction> {
    if k < 1 {
        return Err(Error::InvalidConfig("budget K must be >= 1".into()));
    }
    let n = candidates.len();
    if cache.len() != n {
        return Err(Error::Corrupt(format!(
            "coverage cache has {} entries for {n} candidates",
            cache.len()
        )));
    }
    let mut stats = ReductionStats::default();
    let mut p = cache.sums.clone();
    let mut alive = vec![true; n];
    let mut kept = Vec::with_capacity(k.min(n));

    for _ in 0..k.min(n) {
        let mut best: Option<usize> = None;
        for i in (0..n).filter(|&i| alive[i]) {
            if best.is_none_or(|b| p[i] > p[b]) {
                best = Some(i);
            }
        }
        let idx = best.expect("at least one candidate alive");
        alive[idx] = false;
        kept.push(idx);
        stats.greedy_selections += 1;
        for i in (0..n).filter(|&i| alive[i]) {
            let d = metric.distance(&candidates[i].anchor, &candidates[idx].anchor)?;
            p[i] -= candidates[i].params.psi(d);
            stats.distance_evals += 1;
        }
    }

    let e = kept.len();
    let new_cache = if e == n {
        CoverageCache {
            sums: kept.iter().map(|&i| cache.sums[i]).collect(),
        }
    } else if e > n - e {
        // Fewer vectors were dropped than kept: subtract the dropped ones.
        let dropped: Vec<usize> = (0..n).filter(|&i| alive[i]).collect();
        let mut sums = Vec::with_capacity(e);
        for &i in &kept {
            let mut s = cache.sums[i];
            for &j in &dropped {
                let d = metric.distance(&candidates[i].anchor, &candidates[j].anchor)?;
                s -= candidates[i].params.psi(d);
            }
            sums.push(s);
        }
        stats.distance_evals += (e * dropped.len()) as u64;
        let cache = CoverageCache { sums };
        if cfg!(debug_assertions) {
            let kept_evs: Vec<ExtremeVector> = kept.iter().map(|&i| candidates[i].clone()).collect();
            let (reference, _) = CoverageCache::from_scratch(&kept_evs, metric)?;
            for (a, b) in cache.sums.iter().zip(&reference.sums) {
                debug_assert!(
                    (a - b).abs() <= 1e-9 * b.abs().max(1.0),
                    "incremental coverage sum {a} diverged from {b}"
                );
            }
        }
        cache
    } else {
        let kept_evs: Vec<ExtremeVector> = kept.iter().map(|&i| candidates[i].clone()).collect();
        let (cache, evals) = CoverageCache::from_scratch(&kept_evs, metric)?;
        stats.distance_evals += evals;
        cache
    };

    Ok(WkscReduction {
        kept,
        cache: new_cache,
        stats,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SetCoverReduction {
    /// Indices into the candidates, in selection order.
    pub kept: Vec<usize>,
    pub stats: ReductionStats,
}

/// Pairwise inclusion probabilities `psi[i][j] = Psi_i(x_j)`.
struct PsiMatrix {
    psi: Vec<Vec<f64>>,
}

impl PsiMatrix {
    fn new(candidates: &[ExtremeVector], metric: DistanceMetric) -> Result<(Self, u64)> {
        let n = candidates.len();
        let mut psi = vec![vec![1.0; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = metric.distance(&candidates[i].anchor, &candidates[j].anchor)?;
                psi[i][j] = candidates[i].params.psi(d);
                psi[j][i] = candidates[j].params.psi(d);
            }
        }
        Ok((Self { psi }, (n * n.saturating_sub(1) / 2) as u64))
    }

    /// One greedy minimum set cover pass at threshold `zeta`.
    fn greedy_cover(&self, zeta: f64) -> Vec<usize> {
        let n = self.psi.len();
        let covers: Vec<Vec<usize>> = (0..n)
            .map(|i| (0..n).filter(|&j| self.psi[i][j] >= zeta || i == j).collect())
            .collect();
        let mut covered = vec![false; n];
        let mut remaining = n;
        let mut selected = vec![false; n];
        let mut kept = Vec::new();
        while remaining > 0 {
            let mut best = None;
            let mut best_gain = 0;
            for i in (0..n).filter(|&i| !selected[i]) {
                let gain = covers[i].iter().filter(|&&j| !covered[j]).count();
                if gain > best_gain {
                    best_gain = gain;
                    best = Some(i);
                }
            }
            let idx = best.expect("an uncovered sample always covers itself");
            selected[idx] = true;
            kept.push(idx);
            for &j in &covers[idx] {
                if !covered[j] {
                    covered[j] = true;
                    remaining -= 1;
                }
            }
        }
        kept
    }
}

/// Greedy minimum set cover: `i` covers `j` when `Psi_i(x_j) >= zeta`.
pub fn reduce_set_cover(
    candidates: &[ExtremeVector],
    zeta: f64,
    metric: DistanceMetric,
) -> Result<SetCoverReduction> {
    if !(zeta > 0.0 && zeta < 1.0) {
        return Err(Error::InvalidConfig(format!("coverage threshold must be in (0, 1), got {zeta}")));
    }
    let (matrix, evals) = PsiMatrix::new(candidates, metric)?;
    let kept = matrix.greedy_cover(zeta);
    Ok(SetCoverReduction {
        stats: ReductionStats {
            greedy_selections: kept.len() as u64,
            bisection_iterations: 0,
            coverage_threshold_evals: 1,
            distance_evals: evals,
        },
        kept,
    })
}

/// Set cover with a bisection over the coverage threshold so that at most
/// `k` vectors remain.
///
/// The bracket is `[ZETA_MIN, ZETA_MAX]`; the qualifying cover with the
/// largest threshold is returned once the bracket is narrower than
/// `epsilon`. If even `ZETA_MIN` needs more than `k` vectors, the first `k`
/// picks of that pass are returned.
pub fn reduce_set_cover_budget(
    candidates: &[ExtremeVector],
    k: usize,
    epsilon: f64,
    metric: DistanceMetric,
) -> Result<SetCoverReduction> {
    if k < 1 {
        return Err(Error::InvalidConfig("budget K must be >= 1".into()));
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidConfig(format!("bisection tolerance must be > 0, got {epsilon}")));
    }
    let n = candidates.len();
    if n <= k {
        return Ok(SetCoverReduction {
            kept: (0..n).collect(),
            stats: ReductionStats::default(),
        });
    }

    let (matrix, evals) = PsiMatrix::new(candidates, metric)?;
    let mut stats = ReductionStats {
        distance_evals: evals,
        ..ReductionStats::default()
    };
    let pass = |zeta: f64, stats: &mut ReductionStats| {
        let kept = matrix.greedy_cover(zeta);
        stats.coverage_threshold_evals += 1;
        stats.greedy_selections += kept.len() as u64;
        kept
    };

    let mut lo = ZETA_MIN;
    let mut hi = ZETA_MAX;
    let mut best = pass(lo, &mut stats);
    if best.len() > k {
        best.truncate(k);
        return Ok(SetCoverReduction { kept: best, stats });
    }
    while hi - lo >= epsilon {
        let mid = 0.5 * (lo + hi);
        stats.bisection_iterations += 1;
        let kept = pass(mid, &mut stats);
        if kept.len() <= k {
            lo = mid;
            best = kept;
        } else {
            hi = mid;
        }
    }
    Ok(SetCoverReduction { kept: best, stats })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterParams {
    pub epsilon: f64,
    pub min_points: usize,
}

impl ClusterParams {
    pub fn new(epsilon: f64, min_points: usize) -> Result<Self> {
        if !(epsilon > 0.0) || min_points < 1 {
            return Err(Error::InvalidConfig(format!(
                "cluster params need epsilon > 0 and min_points >= 1, got ({epsilon}, {min_points})"
            )));
        }
        Ok(Self { epsilon, min_points })
    }
}

/// DBSCAN cluster assignment: `Some(cluster)` or `None` for noise.
pub fn dbscan(points: &[&[f64]], params: ClusterParams, metric: DistanceMetric) -> Result<Vec<Option<usize>>> {
    let n = points.len();
    let mut neighbors = vec![Vec::new(); n];
    for i in 0..n {
        neighbors[i].push(i);
        for j in (i + 1)..n {
            if metric.distance(points[i], points[j])? <= params.epsilon {
                neighbors[i].push(j);
                neighbors[j].push(i);
            }
        }
    }
    let is_core: Vec<bool> = neighbors.iter().map(|nb| nb.len() >= params.min_points).collect();

    let mut assignment: Vec<Option<usize>> = vec![None; n];
    let mut cluster = 0;
    for start in 0..n {
        if assignment[start].is_some() || !is_core[start] {
            continue;
        }
        assignment[start] = Some(cluster);
        let mut frontier = vec![start];
        while let Some(p) = frontier.pop() {
            for &q in &neighbors[p] {
                if assignment[q].is_none() {
                    assignment[q] = Some(cluster);
                    if is_core[q] {
                        frontier.push(q);
                    }
                }
            }
        }
        cluster += 1;
    }
    Ok(assignment)
}

/// Replaces one class's samples by DBSCAN cluster centroids.
///
/// Each cluster becomes its coordinate-wise mean; noise points are passed
/// through unchanged after the centroids, in input order.
pub fn dbscan_centroids(
    batch: &[LabeledSample],
    params: ClusterParams,
    metric: DistanceMetric,
) -> Result<Vec<LabeledSample>> {
    let Some(first) = batch.first() else {
        return Ok(Vec::new());
    };
    if let Some(other) = batch.iter().find(|s| s.label != first.label) {
        return Err(Error::InvalidConfig(format!(
            "dbscan_centroids expects one class, got {} and {}",
            first.label, other.label
        )));
    }
    let points: Vec<&[f64]> = batch.iter().map(|s| s.features.as_slice()).collect();
    let assignment = dbscan(&points, params, metric)?;
    let n_clusters = assignment.iter().flatten().max().map_or(0, |m| m + 1);

    let dim = first.dim();
    let mut sums = vec![vec![0.0; dim]; n_clusters];
    let mut counts = vec![0usize; n_clusters];
    let mut noise = Vec::new();
    for (s, a) in batch.iter().zip(&assignment) {
        match a {
            Some(c) => {
                counts[*c] += 1;
                for (acc, v) in sums[*c].iter_mut().zip(s.features.iter()) {
                    *acc += v;
                }
            }
            None => noise.push(s.clone()),
        }
    }
    let mut out = Vec::with_capacity(n_clusters + noise.len());
    for (sum, count) in sums.into_iter().zip(counts) {
        let mean = sum.into_iter().map(|v| v / count as f64).collect();
        out.push(LabeledSample::new(FeatureVector::new(mean)?, first.label.clone()));
    }
    out.extend(noise);
    Ok(out)
}

/// Applies [`dbscan_centroids`] to each class of a mixed batch.
/// Classes are emitted in label order.
pub fn class_wise_centroids(
    batch: &[LabeledSample],
    params: ClusterParams,
    metric: DistanceMetric,
) -> Result<Vec<LabeledSample>> {
    let mut by_class: BTreeMap<&Label, Vec<LabeledSample>> = BTreeMap::new();
    for s in batch {
        by_class.entry(&s.label).or_default().push(s.clone());
    }
    let mut out = Vec::new();
    for samples in by_class.values() {
        out.extend(dbscan_centroids(samples, params, metric)?);
    }
    Ok(out)
}

/// Reduction strategy applied to a model after each fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Reduction {
    None,
    SetCover { zeta: f64 },
    SetCoverBudget { k: usize, epsilon: f64 },
    Wksc { k: usize },
}

impl Reduction {
    pub fn budget(&self) -> Option<usize> {
        match *self {
            Reduction::SetCoverBudget { k, .. } | Reduction::Wksc { k } => Some(k),
            _ => None,
        }
    }
}

impl EvmModel {
    /// Reduces every class in place and refreshes the coverage caches.
    pub fn reduce(&mut self, reduction: &Reduction) -> Result<ReductionStats> {
        if matches!(reduction, Reduction::None) {
            return Ok(ReductionStats::default());
        }
        let metric = self.config.metric;
        let results: Vec<(Label, ClassModel, ReductionStats)> = self
            .classes
            .par_iter()
            .map(|(label, class)| {
                let (kept, cache, mut stats) = match *reduction {
                    Reduction::None => unreachable!(),
                    Reduction::Wksc { k } => {
                        let r = reduce_wksc(&class.evs, &class.coverage, k, metric)?;
                        (r.kept, Some(r.cache), r.stats)
                    }
                    Reduction::SetCover { zeta } => {
                        let r = reduce_set_cover(&class.evs, zeta, metric)?;
                        (r.kept, None, r.stats)
                    }
                    Reduction::SetCoverBudget { k, epsilon } => {
                        let r = reduce_set_cover_budget(&class.evs, k, epsilon, metric)?;
                        (r.kept, None, r.stats)
                    }
                };
                let evs: Vec<ExtremeVector> = kept.iter().map(|&i| class.evs[i].clone()).collect();
                let coverage = match cache {
                    Some(c) => c,
                    None => {
                        let (c, evals) = CoverageCache::from_scratch(&evs, metric)?;
                        stats.distance_evals += evals;
                        c
                    }
                };
                Ok((label.clone(), ClassModel { evs, coverage }, stats))
            })
            .collect::<Result<_>>()?;

        let mut total = ReductionStats::default();
        for (label, class, stats) in results {
            self.classes.insert(label, class);
            total += stats;
        }
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weibull::WeibullParams;

    fn ev(x: f64, shape: f64, scale: f64) -> ExtremeVector {
        ExtremeVector {
            anchor: FeatureVector::new(vec![x]).unwrap(),
            label: Label::new("a").unwrap(),
            params: WeibullParams::new(shape, scale, 1.0).unwrap(),
            tail: vec![1.0],
        }
    }

    fn cache(evs: &[ExtremeVector]) -> CoverageCache {
        CoverageCache::from_scratch(evs, DistanceMetric::Euclidean).unwrap().0
    }

    #[test]
    fn wksc_keeps_everything_when_budget_is_loose() {
        let evs = vec![ev(0.0, 2.0, 1.0), ev(0.5, 2.0, 1.0), ev(3.0, 2.0, 1.0)];
        let c = cache(&evs);
        let r = reduce_wksc(&evs, &c, 5, DistanceMetric::Euclidean).unwrap();
        assert_eq!(r.kept.len(), 3);
        let mut sorted = r.kept.clone();
        sorted.sort();
        assert_eq!(sorted, vec![0, 1, 2]);
        assert_eq!(r.stats.greedy_selections, 3);
        assert_eq!(r.stats.coverage_threshold_evals, 0);
        assert!(matches!(
            reduce_wksc(&evs, &c, 0, DistanceMetric::Euclidean),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn wksc_ties_go_to_lowest_index() {
        // A symmetric pair covers each other equally.
        let evs = vec![ev(0.0, 2.0, 1.0), ev(0.7, 2.0, 1.0)];
        let c = cache(&evs);
        assert_eq!(c.sums[0], c.sums[1]);
        let r = reduce_wksc(&evs, &c, 1, DistanceMetric::Euclidean).unwrap();
        assert_eq!(r.kept, vec![0]);
    }

    #[test]
    fn wksc_cache_paths_agree() {
        // 5 candidates, K = 3 takes the subtractive path; K = 2 recomputes.
        let evs: Vec<_> = (0..5).map(|i| ev(i as f64 * 0.3, 1.5, 1.0)).collect();
        let c = cache(&evs);
        for k in [2, 3, 4] {
            let r = reduce_wksc(&evs, &c, k, DistanceMetric::Euclidean).unwrap();
            let kept: Vec<_> = r.kept.iter().map(|&i| evs[i].clone()).collect();
            let reference = cache(&kept);
            for (a, b) in r.cache.sums.iter().zip(&reference.sums) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn extend_matches_from_scratch() {
        let mut evs: Vec<_> = (0..4).map(|i| ev(i as f64 * 0.4, 2.0, 1.0)).collect();
        let mut c = cache(&evs);
        evs.push(ev(0.7, 3.0, 0.8));
        evs.push(ev(2.0, 1.0, 2.0));
        evs[1] = ev(0.4, 5.0, 0.3);
        c.extend(&evs, 4, &[1], DistanceMetric::Euclidean).unwrap();
        let reference = cache(&evs);
        for (a, b) in c.sums.iter().zip(&reference.sums) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn set_cover_extremes() {
        // Far apart: nobody covers anybody.
        let evs = vec![ev(0.0, 2.0, 0.1), ev(5.0, 2.0, 0.1), ev(10.0, 2.0, 0.1)];
        let r = reduce_set_cover(&evs, 0.999, DistanceMetric::Euclidean).unwrap();
        assert_eq!(r.kept.len(), 3);
        // A wide vector in the middle covers the rest.
        let evs = vec![ev(0.0, 2.0, 0.1), ev(1.0, 2.0, 100.0), ev(2.0, 2.0, 0.1)];
        let r = reduce_set_cover(&evs, 0.5, DistanceMetric::Euclidean).unwrap();
        assert_eq!(r.kept, vec![1]);
        assert!(reduce_set_cover(&evs, 1.0, DistanceMetric::Euclidean).is_err());
    }

    #[test]
    fn set_cover_budget_terminates_immediately_when_loose() {
        let evs = vec![ev(0.0, 2.0, 0.1), ev(5.0, 2.0, 0.1)];
        let r = reduce_set_cover_budget(&evs, 2, 0.01, DistanceMetric::Euclidean).unwrap();
        assert_eq!(r.kept, vec![0, 1]);
        assert_eq!(r.stats.bisection_iterations, 0);
    }

    #[test]
    fn set_cover_budget_truncates_when_unreachable() {
        let evs: Vec<_> = (0..6).map(|i| ev(i as f64 * 100.0, 2.0, 0.1)).collect();
        let r = reduce_set_cover_budget(&evs, 2, 0.01, DistanceMetric::Euclidean).unwrap();
        assert_eq!(r.kept, vec![0, 1]);
        assert_eq!(r.stats.bisection_iterations, 0);
        assert_eq!(r.stats.coverage_threshold_evals, 1);
    }

    #[test]
    fn set_cover_budget_iteration_bound() {
        let evs: Vec<_> = (0..12).map(|i| ev(i as f64 * 0.5, 2.0, 1.0)).collect();
        for eps in [0.1, 0.01, 1e-4] {
            let r = reduce_set_cover_budget(&evs, 3, eps, DistanceMetric::Euclidean).unwrap();
            assert!(r.kept.len() <= 3);
            let bound = (1.0 / eps).log2().ceil() as u64;
            assert!(r.stats.bisection_iterations <= bound);
            assert!(r.stats.bisection_iterations >= 1);
        }
    }

    fn pts(v: &[(f64, f64)]) -> Vec<LabeledSample> {
        v.iter()
            .map(|&(x, y)| LabeledSample::from_parts(vec![x, y], "c").unwrap())
            .collect()
    }

    #[test]
    fn dbscan_single_cluster_is_mean() {
        let batch = pts(&[(0.0, 0.0), (0.1, 0.0), (0.0, 0.1), (0.1, 0.1)]);
        let params = ClusterParams::new(0.5, 3).unwrap();
        let out = dbscan_centroids(&batch, params, DistanceMetric::Euclidean).unwrap();
        assert_eq!(out.len(), 1);
        assert!((out[0].features[0] - 0.05).abs() < 1e-15);
        assert!((out[0].features[1] - 0.05).abs() < 1e-15);
    }

    #[test]
    fn dbscan_all_noise_passes_through() {
        let batch = pts(&[(0.0, 0.0), (5.0, 0.0), (10.0, 0.0)]);
        let params = ClusterParams::new(1.0, 2).unwrap();
        let out = dbscan_centroids(&batch, params, DistanceMetric::Euclidean).unwrap();
        assert_eq!(out, batch);
    }

    #[test]
    fn dbscan_border_points_join_cluster() {
        // 0,1,2 chain: 1 is core with min_points 3; 0 and 2 are border points.
        let batch = pts(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (9.0, 0.0)]);
        let params = ClusterParams::new(1.0, 3).unwrap();
        let points: Vec<&[f64]> = batch.iter().map(|s| s.features.as_slice()).collect();
        let a = dbscan(&points, params, DistanceMetric::Euclidean).unwrap();
        assert_eq!(a, vec![Some(0), Some(0), Some(0), None]);
    }

    #[test]
    fn dbscan_rejects_mixed_classes() {
        let mut batch = pts(&[(0.0, 0.0)]);
        batch.push(LabeledSample::from_parts(vec![1.0, 1.0], "d").unwrap());
        let params = ClusterParams::new(1.0, 1).unwrap();
        assert!(dbscan_centroids(&batch, params, DistanceMetric::Euclidean).is_err());
        assert_eq!(class_wise_centroids(&batch, params, DistanceMetric::Euclidean).unwrap().len(), 2);
        assert!(ClusterParams::new(0.0, 1).is_err());
    }
}
