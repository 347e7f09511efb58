//! Experiment configuration and its flat key/value file form.
//!
//! A config file is a TOML document with top-level keys only:
//!
//! ```toml
//! method = "ievm"
//! reduction = "wksc"
//! budget = 10
//! protocol = "two"
//! classes_per_batch = 2
//! data = "blobs"
//! blob_classes = 20
//! seed = 7
//! far_targets = [0.1, 0.01]
//! ```
//!
//! Unknown keys and keys that do not apply to the chosen protocol or data
//! source are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::distance::DistanceMetric;
use crate::error::{Error, Result};
use crate::fitting::EvmConfig;
use crate::harness::io::FeatureFormat;
use crate::metrics::Averaging;
use crate::protocols::{ProtocolOneConfig, ProtocolTwoConfig};
use crate::reduction::{ClusterParams, Reduction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Cyclic retraining: a full refit on all data seen so far every epoch.
    Evm,
    Ievm,
    /// `Evm` on DBSCAN centroids of each batch.
    CEvm,
    /// `Ievm` on DBSCAN centroids of each batch.
    CIevm,
    Osnn,
    Tnn,
}

impl Method {
    pub fn is_evm(self) -> bool {
        !matches!(self, Method::Osnn | Method::Tnn)
    }

    pub fn is_clustered(self) -> bool {
        matches!(self, Method::CEvm | Method::CIevm)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Evm => "evm",
            Method::Ievm => "ievm",
            Method::CEvm => "c-evm",
            Method::CIevm => "c-ievm",
            Method::Osnn => "osnn",
            Method::Tnn => "tnn",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "evm" => Method::Evm,
            "ievm" => Method::Ievm,
            "c-evm" => Method::CEvm,
            "c-ievm" => Method::CIevm,
            "osnn" => Method::Osnn,
            "tnn" => Method::Tnn,
            other => return Err(Error::InvalidConfig(format!("unknown method {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProtocolSpec {
    One {
        known_fraction: f64,
        batch_size: usize,
        n_epochs: usize,
        holdout_fraction: f64,
    },
    Two {
        known_fraction: f64,
        classes_per_batch: usize,
        test_samples_per_known: usize,
    },
}

impl ProtocolSpec {
    pub fn protocol_one(&self, seed: u64) -> Option<ProtocolOneConfig> {
        match *self {
            ProtocolSpec::One {
                known_fraction,
                batch_size,
                n_epochs,
                holdout_fraction,
            } => Some(ProtocolOneConfig {
                known_fraction,
                batch_size,
                n_epochs,
                holdout_fraction,
                seed,
            }),
            ProtocolSpec::Two { .. } => None,
        }
    }

    pub fn protocol_two(&self, seed: u64) -> Option<ProtocolTwoConfig> {
        match *self {
            ProtocolSpec::Two {
                known_fraction,
                classes_per_batch,
                test_samples_per_known,
            } => Some(ProtocolTwoConfig {
                known_fraction,
                classes_per_batch,
                test_samples_per_known,
                seed,
            }),
            ProtocolSpec::One { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DataSource {
    Blobs {
        classes: usize,
        per_class: usize,
        dim: usize,
        spread: f64,
    },
    File {
        path: PathBuf,
        format: FeatureFormat,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub method: Method,
    pub reduction: Reduction,
    pub evm: EvmConfig,
    pub cluster: ClusterParams,
    pub protocol: ProtocolSpec,
    pub data: DataSource,
    /// Seeds the synthetic data; the protocol stream uses `seed + 1`.
    pub seed: u64,
    pub far_targets: Vec<f64>,
    pub averaging: Averaging,
    /// Adds wall-clock timings to the report, which makes it nondeterministic.
    pub record_timings: bool,
}

impl ExperimentConfig {
    pub fn data_seed(&self) -> u64 {
        self.seed
    }

    pub fn protocol_seed(&self) -> u64 {
        self.seed.wrapping_add(1)
    }

    pub fn validate(&self) -> Result<()> {
        self.evm.validate()?;
        ClusterParams::new(self.cluster.epsilon, self.cluster.min_points)?;
        if !self.method.is_evm() && self.reduction != Reduction::None {
            return Err(Error::InvalidConfig(format!(
                "method {} accepts no reduction",
                self.method.as_str()
            )));
        }
        match self.reduction {
            Reduction::None => {}
            Reduction::SetCover { zeta } if !(zeta > 0.0 && zeta <= 1.0) => {
                return Err(Error::InvalidConfig(format!("coverage threshold must be in (0, 1], got {zeta}")));
            }
            Reduction::SetCoverBudget { k, epsilon } if k == 0 || !(epsilon > 0.0) => {
                return Err(Error::InvalidConfig(format!(
                    "set-cover-budget needs budget >= 1 and tolerance > 0, got ({k}, {epsilon})"
                )));
            }
            Reduction::Wksc { k: 0 } => return Err(Error::InvalidConfig("wksc budget must be >= 1".into())),
            _ => {}
        }
        if self.far_targets.is_empty() || self.far_targets.iter().any(|&f| !(f > 0.0 && f <= 1.0)) {
            return Err(Error::InvalidConfig("far_targets must be a non-empty list in (0, 1]".into()));
        }
        if let DataSource::Blobs {
            classes,
            per_class,
            dim,
            spread,
        } = self.data
        {
            if classes < 2 || per_class == 0 || dim == 0 || !(spread > 0.0) {
                return Err(Error::InvalidConfig("blob parameters must be positive with >= 2 classes".into()));
            }
        }
        Ok(())
    }

    /// Parses a flat TOML config. Relative data paths stay as written.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let flat: FlatConfig = toml::from_str(text)?;
        flat.into_config()
    }

    /// Loads a config file; a relative `data` path is resolved against the
    /// file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut config = Self::from_toml_str(&std::fs::read_to_string(path)?)?;
        if let DataSource::File { path: data, .. } = &mut config.data {
            if data.is_relative() {
                if let Some(dir) = path.parent() {
                    *data = dir.join(&*data);
                }
            }
        }
        Ok(config)
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FlatConfig {
    method: String,
    reduction: Option<String>,
    budget: Option<usize>,
    coverage_threshold: Option<f64>,
    bisection_tolerance: Option<f64>,
    tail_size: Option<usize>,
    distance_multiplier: Option<f64>,
    metric: Option<String>,
    rejection_threshold: Option<f64>,
    cluster_epsilon: Option<f64>,
    cluster_min_points: Option<usize>,
    protocol: Option<String>,
    known_fraction: Option<f64>,
    batch_size: Option<usize>,
    epochs: Option<usize>,
    holdout_fraction: Option<f64>,
    classes_per_batch: Option<usize>,
    test_samples_per_known: Option<usize>,
    data: Option<String>,
    data_format: Option<String>,
    blob_classes: Option<usize>,
    blob_per_class: Option<usize>,
    blob_dim: Option<usize>,
    blob_spread: Option<f64>,
    seed: Option<u64>,
    far_targets: Option<Vec<f64>>,
    averaging: Option<String>,
    record_timings: Option<bool>,
}

fn reject(present: bool, key: &str, context: &str) -> Result<()> {
    if present {
        Err(Error::InvalidConfig(format!("key `{key}` does not apply to {context}")))
    } else {
        Ok(())
    }
}

impl FlatConfig {
    fn into_config(self) -> Result<ExperimentConfig> {
        let method: Method = self.method.parse()?;
        let defaults = EvmConfig::default();
        let metric: DistanceMetric = match &self.metric {
            Some(m) => m.parse()?,
            None => defaults.metric,
        };
        let kind = self.reduction.as_deref().unwrap_or("none");
        let needs_budget = || {
            self.budget
                .ok_or_else(|| Error::InvalidConfig(format!("reduction {kind} requires `budget`")))
        };
        let reduction = match kind {
            "none" => Reduction::None,
            "set-cover" => Reduction::SetCover {
                zeta: self.coverage_threshold.unwrap_or(defaults.coverage_threshold),
            },
            "set-cover-budget" => Reduction::SetCoverBudget {
                k: needs_budget()?,
                epsilon: self.bisection_tolerance.unwrap_or(defaults.bisection_tolerance),
            },
            "wksc" => Reduction::Wksc { k: needs_budget()? },
            other => return Err(Error::InvalidConfig(format!("unknown reduction {other:?}"))),
        };
        let evm = EvmConfig {
            tail_size: self.tail_size.unwrap_or(defaults.tail_size),
            distance_multiplier: self.distance_multiplier.unwrap_or(defaults.distance_multiplier),
            metric,
            budget: reduction.budget(),
            rejection_threshold: self.rejection_threshold.unwrap_or(defaults.rejection_threshold),
            coverage_threshold: self.coverage_threshold.unwrap_or(defaults.coverage_threshold),
            bisection_tolerance: self.bisection_tolerance.unwrap_or(defaults.bisection_tolerance),
        };
        let cluster = ClusterParams::new(
            self.cluster_epsilon.unwrap_or(0.5),
            self.cluster_min_points.unwrap_or(3),
        )?;

        let known_fraction = self.known_fraction.unwrap_or(0.5);
        let protocol = match self.protocol.as_deref().unwrap_or("two") {
            "one" => {
                let ctx = "protocol one";
                reject(self.classes_per_batch.is_some(), "classes_per_batch", ctx)?;
                reject(self.test_samples_per_known.is_some(), "test_samples_per_known", ctx)?;
                ProtocolSpec::One {
                    known_fraction,
                    batch_size: self.batch_size.unwrap_or(24),
                    n_epochs: self.epochs.unwrap_or(10),
                    holdout_fraction: self.holdout_fraction.unwrap_or(0.2),
                }
            }
            "two" => {
                let ctx = "protocol two";
                reject(self.batch_size.is_some(), "batch_size", ctx)?;
                reject(self.epochs.is_some(), "epochs", ctx)?;
                reject(self.holdout_fraction.is_some(), "holdout_fraction", ctx)?;
                ProtocolSpec::Two {
                    known_fraction,
                    classes_per_batch: self.classes_per_batch.unwrap_or(2),
                    test_samples_per_known: self.test_samples_per_known.unwrap_or(5),
                }
            }
            other => return Err(Error::InvalidConfig(format!("unknown protocol {other:?}"))),
        };

        let data = match self.data.as_deref().unwrap_or("blobs") {
            "blobs" => {
                reject(self.data_format.is_some(), "data_format", "blob data")?;
                DataSource::Blobs {
                    classes: self.blob_classes.unwrap_or(10),
                    per_class: self.blob_per_class.unwrap_or(30),
                    dim: self.blob_dim.unwrap_or(2),
                    spread: self.blob_spread.unwrap_or(1.0),
                }
            }
            path => {
                let ctx = "file data";
                reject(self.blob_classes.is_some(), "blob_classes", ctx)?;
                reject(self.blob_per_class.is_some(), "blob_per_class", ctx)?;
                reject(self.blob_dim.is_some(), "blob_dim", ctx)?;
                reject(self.blob_spread.is_some(), "blob_spread", ctx)?;
                let path = PathBuf::from(path);
                let format = match &self.data_format {
                    Some(f) => f.parse()?,
                    None => FeatureFormat::from_path(&path),
                };
                DataSource::File { path, format }
            }
        };

        let config = ExperimentConfig {
            method,
            reduction,
            evm,
            cluster,
            protocol,
            data,
            seed: self.seed.unwrap_or(0),
            far_targets: self.far_targets.unwrap_or_else(|| vec![0.1, 0.01]),
            averaging: match &self.averaging {
                Some(a) => a.parse()?,
                None => Averaging::Micro,
            },
            record_timings: self.record_timings.unwrap_or(false),
        };
        config.validate()?;
        Ok(config)
    }
}
