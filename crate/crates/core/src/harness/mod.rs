//! Data ingestion, synthetic data, experiment runs and persistence.

pub mod config;
pub mod io;
pub mod persist;
pub mod report;
pub mod runner;
pub mod synth;

pub use config::{DataSource, ExperimentConfig, Method, ProtocolSpec};
pub use io::{load_features, save_features, FeatureFormat};
pub use persist::{load_model, save_model};
pub use report::{emit_report, write_report, ReportFormat};
pub use runner::{run_experiment, run_on_data, run_stream, Counters, EpochReport, RunOutcome, RunReport};
pub use synth::{blob_centers, synth_blobs};
