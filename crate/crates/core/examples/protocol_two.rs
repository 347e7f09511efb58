//! Protocol II: class-incremental batches, comparing iEVM with cyclic
//! retraining and writing a CSV report.

use ievm::harness::config::{DataSource, ExperimentConfig, Method, ProtocolSpec};
use ievm::harness::{emit_report, run_experiment, ReportFormat};
use ievm::metrics::Averaging;
use ievm::reduction::{ClusterParams, Reduction};
use ievm::EvmConfig;

fn main() -> ievm::Result<()> {
    let base = ExperimentConfig {
        method: Method::Ievm,
        reduction: Reduction::Wksc { k: 5 },
        evm: EvmConfig {
            tail_size: 10,
            ..EvmConfig::default()
        },
        cluster: ClusterParams::new(0.5, 3)?,
        protocol: ProtocolSpec::Two {
            known_fraction: 0.8,
            classes_per_batch: 2,
            test_samples_per_known: 5,
        },
        data: DataSource::Blobs {
            classes: 25,
            per_class: 100,
            dim: 4,
            spread: 1.0,
        },
        seed: 66,
        far_targets: vec![0.1, 0.01],
        averaging: Averaging::Micro,
        record_timings: false,
    };

    for method in [Method::Ievm, Method::Evm] {
        let config = ExperimentConfig { method, ..base.clone() };
        let report = run_experiment(&config)?;
        let last = report.epochs.last().expect("at least one batch");
        println!(
            "{:>5}: final DIR@0.1 {:.3}, Weibull refits {}, EVs {}",
            method.as_str(),
            last.dir_far.dir_values[0],
            last.counters.weibull_refits,
            last.ev_total
        );
        if method == Method::Ievm {
            let path = std::env::temp_dir().join("ievm_protocol_two.csv");
            emit_report(&report, &path, ReportFormat::Csv)?;
            println!("       report written to {}", path.display());
        }
    }
    Ok(())
}
