//! Open-world evaluation protocols and the openness measure.
//!
//! Streams refer to samples by their index in the source dataset, so a
//! stream can be written to a manifest and replayed exactly.
//!
//! * Protocol I starts with two known classes, introduces one new known class
//!   per epoch while revisiting seen classes, and keeps training on seen
//!   classes once every known class has appeared.
//! * Protocol II is purely class-incremental: each batch holds all training
//!   samples of a fixed number of previously unseen known classes.
//!
//! Both share one test set: every sample of the unknown classes plus held-out
//! samples of each known class.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::{Label, LabeledSample};

/// `1 - sqrt(2 * n_train / (n_train + n_test))`.
pub fn openness(n_train_classes: usize, n_test_classes: usize) -> Result<f64> {
    if n_train_classes == 0 || n_train_classes > n_test_classes {
        return Err(Error::InvalidProtocol(format!(
            "openness needs 0 < n_train <= n_test, got ({n_train_classes}, {n_test_classes})"
        )));
    }
    let (tr, te) = (n_train_classes as f64, n_test_classes as f64);
    Ok(1.0 - (2.0 * tr / (tr + te)).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochBatch {
    /// 1-based epoch index.
    pub epoch: usize,
    pub indices: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestItem {
    pub index: usize,
    pub known: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolStream {
    pub batches: Vec<EpochBatch>,
    pub test: Vec<TestItem>,
    pub known_classes: BTreeSet<Label>,
    pub unknown_classes: BTreeSet<Label>,
    /// Openness after each epoch's training classes, aligned with `batches`.
    pub openness_schedule: Vec<f64>,
}

impl ProtocolStream {
    pub fn batch_samples(&self, data: &[LabeledSample], batch: usize) -> Vec<LabeledSample> {
        self.batches[batch]
            .indices
            .iter()
            .map(|&i| data[i].clone())
            .collect()
    }

    pub fn test_samples(&self, data: &[LabeledSample]) -> Vec<(LabeledSample, bool)> {
        self.test.iter().map(|t| (data[t.index].clone(), t.known)).collect()
    }

    pub fn save_manifest(&self, path: impl AsRef<Path>) -> Result<()> {
        let json = serde_json::to_vec_pretty(self)?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load_manifest(path: impl AsRef<Path>) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        Ok(serde_json::from_slice(&bytes)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolOneConfig {
    pub known_fraction: f64,
    pub batch_size: usize,
    pub n_epochs: usize,
    /// Share of each known class's samples held out for testing (at least one
    /// when the class has two or more samples).
    pub holdout_fraction: f64,
    pub seed: u64,
}

impl ProtocolOneConfig {
    /// 50% known classes, batches of 24, 100 epochs.
    pub fn image_classification(seed: u64) -> Self {
        Self {
            known_fraction: 0.5,
            batch_size: 24,
            n_epochs: 100,
            holdout_fraction: 0.2,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolTwoConfig {
    pub known_fraction: f64,
    pub classes_per_batch: usize,
    pub test_samples_per_known: usize,
    pub seed: u64,
}

impl ProtocolTwoConfig {
    /// 70% known classes, 56 classes per batch, one test sample per known class.
    pub fn writer_identification(seed: u64) -> Self {
        Self {
            known_fraction: 0.7,
            classes_per_batch: 56,
            test_samples_per_known: 1,
            seed,
        }
    }
}

struct ClassSplit {
    /// Known classes in introduction order.
    known: Vec<Label>,
    unknown: Vec<Label>,
    by_class: BTreeMap<Label, Vec<usize>>,
}

fn split_classes(data: &[LabeledSample], known_fraction: f64, rng: &mut ChaCha8Rng) -> Result<ClassSplit> {
    if !(known_fraction > 0.0 && known_fraction <= 1.0) {
        return Err(Error::InvalidProtocol(format!(
            "known_fraction must be in (0, 1], got {known_fraction}"
        )));
    }
    let mut by_class: BTreeMap<Label, Vec<usize>> = BTreeMap::new();
    for (i, s) in data.iter().enumerate() {
        by_class.entry(s.label.clone()).or_default().push(i);
    }
    let mut classes: Vec<Label> = by_class.keys().cloned().collect();
    classes.shuffle(rng);
    let n_known = (known_fraction * classes.len() as f64).round() as usize;
    if n_known < 2 {
        return Err(Error::InvalidProtocol(format!(
            "need at least 2 known classes, got {n_known} of {}",
            classes.len()
        )));
    }
    let unknown = classes.split_off(n_known);
    for indices in by_class.values_mut() {
        indices.shuffle(rng);
    }
    Ok(ClassSplit {
        known: classes,
        unknown,
        by_class,
    })
}

fn schedule(seen_per_epoch: &[usize], n_classes: usize) -> Result<Vec<f64>> {
    seen_per_epoch.iter().map(|&s| openness(s, n_classes)).collect()
}

fn finish_test(split: &ClassSplit, known_test: Vec<usize>) -> Vec<TestItem> {
    let mut test: Vec<TestItem> = known_test
        .into_iter()
        .map(|index| TestItem { index, known: true })
        .chain(
            split
                .unknown
                .iter()
                .flat_map(|c| split.by_class[c].iter())
                .map(|&index| TestItem { index, known: false }),
        )
        .collect();
    test.sort_by_key(|t| t.index);
    test
}

/// Generates a Protocol I stream.
///
/// Epoch 1 holds two known classes; epochs `2..|C_K|-1` each add one unseen
/// known class, which contributes `ceil(batch_size / seen)` samples, and the
/// rest of the batch is drawn uniformly from unused samples of previously
/// seen classes. Later epochs draw from all known classes.
pub fn protocol1_generate(data: &[LabeledSample], cfg: &ProtocolOneConfig) -> Result<ProtocolStream> {
    if cfg.batch_size < 2 || cfg.n_epochs < 1 {
        return Err(Error::InvalidProtocol(format!(
            "batch_size must be >= 2 and n_epochs >= 1, got ({}, {})",
            cfg.batch_size, cfg.n_epochs
        )));
    }
    if !(0.0..1.0).contains(&cfg.holdout_fraction) {
        return Err(Error::InvalidProtocol(format!(
            "holdout_fraction must be in [0, 1), got {}",
            cfg.holdout_fraction
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let split = split_classes(data, cfg.known_fraction, &mut rng)?;
    let n_classes = split.by_class.len();

    let mut pools: BTreeMap<&Label, Vec<usize>> = BTreeMap::new();
    let mut known_test = Vec::new();
    for c in &split.known {
        let indices = &split.by_class[c];
        let n = indices.len();
        let held = if n < 2 {
            0
        } else {
            ((cfg.holdout_fraction * n as f64).round() as usize).clamp(1, n - 1)
        };
        known_test.extend_from_slice(&indices[..held]);
        pools.insert(c, indices[held..].to_vec());
    }

    let n_known = split.known.len();
    let mut batches = Vec::with_capacity(cfg.n_epochs);
    let mut seen_counts = Vec::with_capacity(cfg.n_epochs);
    let mut seen: Vec<&Label> = Vec::new();
    for epoch in 1..=cfg.n_epochs {
        let new: Vec<&Label> = if epoch == 1 {
            split.known[..2].iter().collect()
        } else if epoch < n_known {
            vec![&split.known[epoch]]
        } else {
            Vec::new()
        };
        let fill_from: Vec<&Label> = if epoch == 1 {
            new.clone()
        } else {
            seen.clone()
        };
        seen.extend(new.iter().copied());

        let mut indices = Vec::with_capacity(cfg.batch_size);
        let quota = cfg.batch_size.div_ceil(seen.len());
        for c in &new {
            let pool = pools.get_mut(c).expect("known class has a pool");
            let take = quota.min(pool.len()).min(cfg.batch_size - indices.len());
            if take == 0 {
                return Err(Error::InsufficientSamples {
                    epoch,
                    reason: format!("new class {c} has no training samples left"),
                });
            }
            indices.extend(pool.drain(..take));
        }

        let rest = cfg.batch_size - indices.len();
        if rest > 0 {
            let candidates: Vec<(&Label, usize)> = fill_from
                .iter()
                .flat_map(|c| (0..pools[c].len()).map(move |i| (*c, i)))
                .collect();
            if candidates.len() < rest {
                return Err(Error::InsufficientSamples {
                    epoch,
                    reason: format!("{rest} samples needed, {} left", candidates.len()),
                });
            }
            let mut picked: Vec<(&Label, usize)> = index::sample(&mut rng, candidates.len(), rest)
                .into_iter()
                .map(|i| candidates[i])
                .collect();
            // Remove from the back so positions stay valid.
            picked.sort_by(|a, b| a.0.cmp(b.0).then(b.1.cmp(&a.1)));
            let mut drawn = Vec::with_capacity(rest);
            for (c, pos) in picked {
                drawn.push(pools.get_mut(c).expect("pool").remove(pos));
            }
            drawn.shuffle(&mut rng);
            indices.extend(drawn);
        }
        batches.push(EpochBatch { epoch, indices });
        seen_counts.push(seen.len());
    }

    Ok(ProtocolStream {
        batches,
        test: finish_test(&split, known_test),
        known_classes: split.known.iter().cloned().collect(),
        unknown_classes: split.unknown.iter().cloned().collect(),
        openness_schedule: schedule(&seen_counts, n_classes)?,
    })
}

/// Generates a Protocol II stream.
///
/// Known classes are partitioned into batches of `classes_per_batch` (the
/// last may be smaller). A known class with more than
/// `test_samples_per_known` samples leaves that many in the test set; smaller
/// classes leave one, and single-sample classes leave none.
pub fn protocol2_generate(data: &[LabeledSample], cfg: &ProtocolTwoConfig) -> Result<ProtocolStream> {
    if cfg.classes_per_batch < 1 || cfg.test_samples_per_known < 1 {
        return Err(Error::InvalidProtocol(
            "classes_per_batch and test_samples_per_known must be >= 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let split = split_classes(data, cfg.known_fraction, &mut rng)?;
    if cfg.classes_per_batch > split.known.len() {
        return Err(Error::InvalidProtocol(format!(
            "classes_per_batch {} exceeds the {} known classes",
            cfg.classes_per_batch,
            split.known.len()
        )));
    }
    let n_classes = split.by_class.len();

    let mut known_test = Vec::new();
    let mut batches = Vec::new();
    let mut seen_counts = Vec::new();
    let mut seen = 0;
    for (b, group) in split.known.chunks(cfg.classes_per_batch).enumerate() {
        let mut indices = Vec::new();
        for c in group {
            let all = &split.by_class[c];
            let held = match all.len() {
                n if n > cfg.test_samples_per_known => cfg.test_samples_per_known,
                1 => 0,
                _ => 1,
            };
            known_test.extend_from_slice(&all[..held]);
            indices.extend_from_slice(&all[held..]);
        }
        indices.shuffle(&mut rng);
        seen += group.len();
        batches.push(EpochBatch { epoch: b + 1, indices });
        seen_counts.push(seen);
    }

    Ok(ProtocolStream {
        batches,
        test: finish_test(&split, known_test),
        known_classes: split.known.iter().cloned().collect(),
        unknown_classes: split.unknown.iter().cloned().collect(),
        openness_schedule: schedule(&seen_counts, n_classes)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dataset(n_classes: usize, per_class: usize) -> Vec<LabeledSample> {
        (0..n_classes)
            .flat_map(|c| {
                (0..per_class).map(move |i| {
                    LabeledSample::from_parts(vec![c as f64, i as f64], &format!("c{c:03}")).unwrap()
                })
            })
            .collect()
    }

    #[test]
    fn openness_values() {
        assert!((openness(2, 100).unwrap() - 0.802).abs() < 1e-3);
        assert!((openness(50, 100).unwrap() - 0.184).abs() < 1e-3);
        assert!((openness(56, 720).unwrap() - 0.620).abs() < 1e-3);
        assert!((openness(504, 720).unwrap() - 0.093).abs() < 1e-3);
        assert_eq!(openness(7, 7).unwrap(), 0.0);
        assert!(openness(8, 7).is_err());
    }

    #[test]
    fn protocol_one_schedule_matches_cifar_setting() {
        let data = dataset(100, 40);
        let cfg = ProtocolOneConfig {
            n_epochs: 60,
            ..ProtocolOneConfig::image_classification(1)
        };
        let stream = protocol1_generate(&data, &cfg).unwrap();
        assert_eq!(stream.known_classes.len(), 50);
        assert!((stream.openness_schedule[0] - 0.802).abs() < 1e-3);
        for e in 48..60 {
            assert!((stream.openness_schedule[e] - 0.184).abs() < 1e-3);
        }
        assert!(stream.batches.iter().all(|b| b.indices.len() == 24));
    }

    #[test]
    fn protocol_one_all_known() {
        let data = dataset(6, 20);
        let cfg = ProtocolOneConfig {
            known_fraction: 1.0,
            batch_size: 6,
            n_epochs: 8,
            holdout_fraction: 0.2,
            seed: 3,
        };
        let stream = protocol1_generate(&data, &cfg).unwrap();
        assert!(stream.unknown_classes.is_empty());
        assert_eq!(*stream.openness_schedule.last().unwrap(), 0.0);
    }

    #[test]
    fn protocol_one_reports_starved_epoch() {
        let data = dataset(4, 3);
        let cfg = ProtocolOneConfig {
            known_fraction: 1.0,
            batch_size: 4,
            n_epochs: 10,
            holdout_fraction: 0.2,
            seed: 0,
        };
        match protocol1_generate(&data, &cfg) {
            Err(Error::InsufficientSamples { epoch, .. }) => assert!(epoch > 1),
            other => panic!("expected starvation error, got {other:?}"),
        }
    }

    #[test]
    fn protocol_two_writer_identification_schedule() {
        let data = dataset(720, 5);
        let stream = protocol2_generate(&data, &ProtocolTwoConfig::writer_identification(7)).unwrap();
        assert_eq!(stream.batches.len(), 9);
        assert!((stream.openness_schedule[0] - 0.620).abs() < 1e-3);
        assert!((stream.openness_schedule[8] - 0.093).abs() < 1e-3);
        assert!(stream.batches.iter().all(|b| b.indices.len() == 56 * 4));
    }

    #[test]
    fn protocol_two_single_batch_and_errors() {
        let data = dataset(10, 4);
        let cfg = ProtocolTwoConfig {
            known_fraction: 0.5,
            classes_per_batch: 5,
            test_samples_per_known: 1,
            seed: 0,
        };
        let stream = protocol2_generate(&data, &cfg).unwrap();
        assert_eq!(stream.openness_schedule.len(), 1);
        let too_many = ProtocolTwoConfig {
            classes_per_batch: 6,
            ..cfg
        };
        assert!(matches!(protocol2_generate(&data, &too_many), Err(Error::InvalidProtocol(_))));
    }

    #[test]
    fn protocol_two_small_classes_keep_one_test_sample() {
        let mut data = dataset(4, 2);
        data.extend(dataset(1, 1).into_iter().map(|mut s| {
            s.label = Label::new("solo").unwrap();
            s
        }));
        let cfg = ProtocolTwoConfig {
            known_fraction: 1.0,
            classes_per_batch: 5,
            test_samples_per_known: 3,
            seed: 2,
        };
        let stream = protocol2_generate(&data, &cfg).unwrap();
        let mut per_class: BTreeMap<&Label, usize> = BTreeMap::new();
        for t in &stream.test {
            *per_class.entry(&data[t.index].label).or_default() += 1;
        }
        assert_eq!(per_class.len(), 4);
        assert!(per_class.values().all(|&n| n == 1));
    }

    #[test]
    fn manifest_round_trip() {
        let data = dataset(6, 10);
        let cfg = ProtocolTwoConfig {
            known_fraction: 0.5,
            classes_per_batch: 2,
            test_samples_per_known: 2,
            seed: 9,
        };
        let stream = protocol2_generate(&data, &cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("stream.json");
        stream.save_manifest(&path).unwrap();
        assert_eq!(ProtocolStream::load_manifest(&path).unwrap(), stream);
    }
}
