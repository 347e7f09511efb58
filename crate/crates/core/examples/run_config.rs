//! Runs an experiment described by a flat key/value config, the same format
//! the `ievm run` subcommand reads, and prints the CSV report.

use ievm::harness::config::ExperimentConfig;
use ievm::harness::{run_experiment, write_report, ReportFormat};

const CONFIG: &str = r#"
method = "c-ievm"
reduction = "wksc"
budget = 8
tail_size = 15
cluster_epsilon = 1.0
cluster_min_points = 3
protocol = "one"
known_fraction = 0.5
batch_size = 12
epochs = 6
data = "blobs"
blob_classes = 12
blob_per_class = 40
blob_dim = 3
seed = 7
far_targets = [0.1, 0.01]
averaging = "macro"
"#;

fn main() -> ievm::Result<()> {
    let config = ExperimentConfig::from_toml_str(CONFIG)?;
    let report = run_experiment(&config)?;
    write_report(&report, std::io::stdout().lock(), ReportFormat::Csv)?;

    let typo = CONFIG.replace("tail_size", "tailsize");
    match ExperimentConfig::from_toml_str(&typo) {
        Ok(_) => println!("unexpectedly accepted a misspelled key"),
        Err(e) => println!("misspelled key rejected: {e}"),
    }
    Ok(())
}
