#![allow(dead_code)]

use ievm::harness::config::{DataSource, ExperimentConfig, Method, ProtocolSpec};
use ievm::metrics::Averaging;
use ievm::reduction::{ClusterParams, Reduction};
use ievm::EvmConfig;

/// A small Protocol II blob experiment: 8 classes, 6 known, 2 per batch.
pub fn blob_config(method: Method, reduction: Reduction, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        method,
        reduction,
        evm: EvmConfig {
            tail_size: 15,
            budget: reduction.budget(),
            ..EvmConfig::default()
        },
        cluster: ClusterParams::new(1.0, 3).unwrap(),
        protocol: ProtocolSpec::Two {
            known_fraction: 0.75,
            classes_per_batch: 2,
            test_samples_per_known: 5,
        },
        data: DataSource::Blobs {
            classes: 8,
            per_class: 30,
            dim: 3,
            spread: 1.0,
        },
        seed,
        far_targets: vec![0.5, 0.1, 0.01],
        averaging: Averaging::Micro,
        record_timings: false,
    }
}
