//! Experiment runner: fit, reduce and evaluate once per epoch.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::NnStore;
use crate::error::{Error, Result};
use crate::fitting::{batch_fit_with_stats, EvmModel, FitStats};
use crate::harness::config::{DataSource, ExperimentConfig, Method};
use crate::harness::io::load_features;
use crate::harness::synth::synth_blobs;
use crate::metrics::{dir_at_far, DirFarResult, EvalRecord};
use crate::predict::{Decision, Prediction};
use crate::protocols::{protocol1_generate, protocol2_generate, ProtocolStream};
use crate::reduction::{class_wise_centroids, ReductionStats};
use crate::sample::{Label, LabeledSample};

/// Cumulative operation counts since the start of a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub weibull_refits: u64,
    pub distance_evals: u64,
    pub greedy_selections: u64,
    pub bisection_iterations: u64,
}

impl Counters {
    fn add_fit(&mut self, s: &FitStats) {
        self.weibull_refits += s.weibull_refits;
        self.distance_evals += s.distance_evals;
    }

    fn add_reduction(&mut self, s: &ReductionStats) {
        self.greedy_selections += s.greedy_selections;
        self.bisection_iterations += s.bisection_iterations;
        self.distance_evals += s.distance_evals;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochTimings {
    pub fit_ms: f64,
    pub reduce_ms: f64,
    pub eval_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochReport {
    pub epoch: usize,
    /// Raw training samples seen so far, before any clustering.
    pub samples_seen: usize,
    pub openness: f64,
    pub dir_far: DirFarResult,
    /// Extreme vectors per class, or stored samples for the NN baselines.
    pub ev_counts: BTreeMap<Label, usize>,
    pub ev_total: usize,
    /// Share of existing extreme vectors re-estimated this epoch (iEVM only).
    pub update_ratio: Option<f64>,
    pub counters: Counters,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<EpochTimings>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub seed: u64,
    pub config: ExperimentConfig,
    pub known_test: usize,
    pub unknown_test: usize,
    pub epochs: Vec<EpochReport>,
}

/// A report plus the final state of the learner.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: RunReport,
    pub model: Option<EvmModel>,
    pub store: Option<NnStore>,
}

pub fn load_data(config: &ExperimentConfig) -> Result<Vec<LabeledSample>> {
    match &config.data {
        DataSource::Blobs {
            classes,
            per_class,
            dim,
            spread,
        } => synth_blobs(*classes, *per_class, *dim, *spread, config.data_seed()),
        DataSource::File { path, format } => load_features(path, *format),
    }
}

pub fn build_stream(config: &ExperimentConfig, data: &[LabeledSample]) -> Result<ProtocolStream> {
    let seed = config.protocol_seed();
    match (config.protocol.protocol_one(seed), config.protocol.protocol_two(seed)) {
        (Some(p), _) => protocol1_generate(data, &p),
        (_, Some(p)) => protocol2_generate(data, &p),
        _ => unreachable!("protocol spec is one of two variants"),
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    let data = load_data(config)?;
    Ok(run_on_data(config, &data)?.report)
}

pub fn run_on_data(config: &ExperimentConfig, data: &[LabeledSample]) -> Result<RunOutcome> {
    config.validate()?;
    let stream = build_stream(config, data)?;
    run_stream(config, data, &stream)
}

enum Learner {
    Evm { model: Option<EvmModel>, seen: Vec<LabeledSample> },
    Ievm(EvmModel),
    Nn(NnStore),
}

fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Runs a prepared stream; `config.protocol` and `config.data` are only echoed.
pub fn run_stream(config: &ExperimentConfig, data: &[LabeledSample], stream: &ProtocolStream) -> Result<RunOutcome> {
    config.validate()?;
    let test: Vec<(&LabeledSample, bool)> = stream.test.iter().map(|t| (&data[t.index], t.known)).collect();
    let mut learner = match config.method {
        Method::Evm | Method::CEvm => Learner::Evm {
            model: None,
            seen: Vec::new(),
        },
        Method::Ievm | Method::CIevm => Learner::Ievm(EvmModel::new(config.evm.clone())?),
        Method::Osnn | Method::Tnn => Learner::Nn(NnStore::new(config.evm.metric)),
    };
    let mut counters = Counters::default();
    let mut samples_seen = 0;
    let mut epochs = Vec::with_capacity(stream.batches.len());

    for (b, batch) in stream.batches.iter().enumerate() {
        let epoch = batch.epoch;
        let raw = stream.batch_samples(data, b);
        samples_seen += raw.len();
        let mut step = || -> Result<EpochReport> {
            let t_fit = Instant::now();
            let processed = if config.method.is_clustered() {
                class_wise_centroids(&raw, config.cluster, config.evm.metric)?
            } else {
                raw.clone()
            };
            let mut update_ratio = None;
            match &mut learner {
                Learner::Evm { model, seen } => {
                    seen.extend(processed);
                    let (m, stats) = batch_fit_with_stats(seen, &config.evm)?;
                    counters.add_fit(&stats);
                    *model = Some(m);
                }
                Learner::Ievm(model) => {
                    let stats = model.partial_fit(&processed)?;
                    counters.add_fit(&stats);
                    if stats.existing_evs > 0 {
                        update_ratio = Some(stats.update_ratio());
                    }
                }
                Learner::Nn(store) => store.partial_fit(&processed)?,
            }
            let fit_ms = ms(t_fit);

            let t_reduce = Instant::now();
            let model = match &mut learner {
                Learner::Evm { model, .. } => model.as_mut(),
                Learner::Ievm(model) => Some(model),
                Learner::Nn(_) => None,
            };
            if let Some(model) = model {
                let stats = model.reduce(&config.reduction)?;
                counters.add_reduction(&stats);
            }
            let reduce_ms = ms(t_reduce);

            let t_eval = Instant::now();
            let records = evaluate(&learner, config.method, &test)?;
            let dir_far = dir_at_far(&records, &config.far_targets, config.averaging)?;
            let eval_ms = ms(t_eval);

            let ev_counts = match &learner {
                Learner::Evm { model, .. } => model.as_ref().map(|m| m.ev_counts()).unwrap_or_default(),
                Learner::Ievm(model) => model.ev_counts(),
                Learner::Nn(store) => {
                    let mut counts = BTreeMap::new();
                    for s in &store.samples {
                        *counts.entry(s.label.clone()).or_default() += 1;
                    }
                    counts
                }
            };
            if let Some(k) = config.reduction.budget() {
                debug_assert!(ev_counts.values().all(|&n| n <= k));
            }
            Ok(EpochReport {
                epoch,
                samples_seen,
                openness: stream.openness_schedule[b],
                dir_far,
                ev_total: ev_counts.values().sum(),
                ev_counts,
                update_ratio,
                counters,
                timings: config.record_timings.then_some(EpochTimings {
                    fit_ms,
                    reduce_ms,
                    eval_ms,
                }),
            })
        };
        epochs.push(step().map_err(|e| e.at_epoch(epoch))?);
    }

    let known_test = test.iter().filter(|(_, k)| *k).count();
    let report = RunReport {
        seed: config.seed,
        config: config.clone(),
        known_test,
        unknown_test: test.len() - known_test,
        epochs,
    };
    let (model, store) = match learner {
        Learner::Evm { model, .. } => (model, None),
        Learner::Ievm(model) => (Some(model), None),
        Learner::Nn(store) => (None, Some(store)),
    };
    Ok(RunOutcome { report, model, store })
}

fn evaluate(learner: &Learner, method: Method, test: &[(&LabeledSample, bool)]) -> Result<Vec<EvalRecord>> {
    test.par_iter()
        .map(|(s, known)| {
            let x = s.features.as_slice();
            let p: Prediction = match learner {
                Learner::Evm { model: Some(m), .. } | Learner::Ievm(m) => m.predict_with_threshold(x, 0.0)?,
                Learner::Evm { model: None, .. } => return Err(Error::EmptyModel),
                Learner::Nn(store) => match method {
                    Method::Osnn => store.osnn_predict(x, 1.0)?,
                    _ => store.tnn_predict(x, f64::INFINITY)?,
                },
            };
            let truth = if *known {
                Decision::Known(s.label.clone())
            } else {
                Decision::Unknown
            };
            Ok(EvalRecord::from_prediction(truth, &p))
        })
        .collect()
}
