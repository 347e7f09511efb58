//! OSNN and thresholded nearest neighbor next to the EVM variants, all on the
//! same Protocol II stream.

use ievm::harness::config::{DataSource, ExperimentConfig, Method, ProtocolSpec};
use ievm::harness::run_experiment;
use ievm::metrics::Averaging;
use ievm::reduction::{ClusterParams, Reduction};
use ievm::EvmConfig;

fn main() -> ievm::Result<()> {
    let runs = [
        (Method::Osnn, Reduction::None),
        (Method::Tnn, Reduction::None),
        (Method::Ievm, Reduction::Wksc { k: 10 }),
        (Method::CIevm, Reduction::Wksc { k: 10 }),
        (Method::Ievm, Reduction::SetCoverBudget { k: 10, epsilon: 0.05 }),
    ];
    for (method, reduction) in runs {
        let config = ExperimentConfig {
            method,
            reduction,
            evm: EvmConfig {
                tail_size: 20,
                ..EvmConfig::default()
            },
            cluster: ClusterParams::new(1.0, 3)?,
            protocol: ProtocolSpec::Two {
                known_fraction: 0.7,
                classes_per_batch: 3,
                test_samples_per_known: 10,
            },
            data: DataSource::Blobs {
                classes: 20,
                per_class: 50,
                dim: 6,
                spread: 1.0,
            },
            seed: 5,
            far_targets: vec![0.1],
            averaging: Averaging::Micro,
            record_timings: false,
        };
        let report = run_experiment(&config)?;
        let dirs: Vec<String> = report
            .epochs
            .iter()
            .map(|e| format!("{:.2}", e.dir_far.dir_values[0]))
            .collect();
        println!("{:>6} {:<45} DIR@0.1 per batch: {}", method.as_str(), format!("{reduction:?}"), dirs.join(" "));
    }
    Ok(())
}
