//! Incremental Extreme Value Machine for open-world recognition.
//!
//! An [`EvmModel`] keeps, per class, a set of extreme vectors: anchors with a
//! Weibull model of the distance to the nearest samples of other classes. A
//! query's score for a class is its highest inclusion probability
//! `exp(-(d / scale)^shape)` over that class's anchors, and queries scoring
//! below a threshold are rejected as unknown.
//!
//! [`EvmModel::partial_fit`] absorbs new batches while re-estimating only the
//! extreme vectors whose tails actually change, and [`EvmModel::reduce`]
//! keeps the model within a per-class budget.
//!
//! ```
//! use ievm::{harness::synth_blobs, EvmConfig, EvmModel, Reduction};
//!
//! let data = synth_blobs(3, 40, 2, 1.0, 7).unwrap();
//! let mut model = EvmModel::new(EvmConfig { tail_size: 20, ..EvmConfig::default() }).unwrap();
//! model.partial_fit(&data[..60]).unwrap();
//! model.partial_fit(&data[60..]).unwrap();
//! model.reduce(&Reduction::Wksc { k: 5 }).unwrap();
//! let p = model.predict(data[0].features.as_slice()).unwrap();
//! assert_eq!(p.label.known(), Some(&data[0].label));
//! ```

pub mod baselines;
pub mod distance;
pub mod error;
pub mod fitting;
pub mod harness;
pub mod metrics;
pub mod predict;
pub mod protocols;
pub mod reduction;
pub mod sample;
pub mod weibull;

pub use baselines::NnStore;
pub use distance::{distance, DistanceMetric};
pub use error::{Error, Result};
pub use fitting::{batch_fit, batch_fit_with_stats, fit_anchor, ClassModel, EvmConfig, EvmModel, ExtremeVector, FitStats};
pub use metrics::{confusion_summary, derive_threshold, dir_at_far, Averaging, ConfusionSummary, DirFarResult, EvalRecord};
pub use predict::{predict, Decision, Prediction, ScoreMatrix};
pub use protocols::{
    openness, protocol1_generate, protocol2_generate, ProtocolOneConfig, ProtocolStream, ProtocolTwoConfig,
};
pub use reduction::{
    class_wise_centroids, dbscan, dbscan_centroids, reduce_set_cover, reduce_set_cover_budget, reduce_wksc,
    ClusterParams, CoverageCache, Reduction, ReductionStats,
};
pub use sample::{FeatureVector, Label, LabeledSample};
pub use weibull::{fit_weibull, psi, WeibullFit, WeibullParams};
