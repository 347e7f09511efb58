use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use ievm::harness::{
    emit_report, load_features, load_model, run_experiment, save_features, save_model, synth_blobs, ExperimentConfig,
    FeatureFormat, ReportFormat,
};
use ievm::{DistanceMetric, EvmConfig, EvmModel, Reduction};

#[derive(Parser)]
#[command(name = "ievm", version, about = "Incremental Extreme Value Machine toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write seeded Gaussian blobs to a feature file.
    Synth {
        #[arg(long)]
        classes: usize,
        #[arg(long)]
        per_class: usize,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 1.0)]
        spread: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// csv or binary; inferred from the extension by default.
        #[arg(long)]
        format: Option<String>,
    },
    /// Fit a model on a feature file, or continue fitting an existing one.
    Fit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Existing model to update with `partial_fit`.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, default_value_t = 75)]
        tail_size: usize,
        #[arg(long, default_value_t = 0.5)]
        distance_multiplier: f64,
        #[arg(long, default_value = "euclidean")]
        metric: String,
        #[arg(long, default_value_t = 0.5)]
        rejection_threshold: f64,
    },
    /// Predict every sample of a feature file; writes `label,prediction,score` CSV.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Rejection threshold; the model's own by default.
        #[arg(long)]
        threshold: Option<f64>,
        /// Output file; stdout by default.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reduce a model in place or into a new file.
    Reduce {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// wksc, set-cover or set-cover-budget.
        #[arg(long, default_value = "wksc")]
        method: String,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long, default_value_t = 0.5)]
        coverage_threshold: f64,
        #[arg(long, default_value_t = 0.01)]
        bisection_tolerance: f64,
    },
    /// Run an experiment described by a flat config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_report: PathBuf,
        #[arg(long, default_value = "json")]
        format: String,
    },
    /// Convert between CSV and binary feature files.
    Convert {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        from: Option<String>,
        #[arg(long)]
        to: Option<String>,
    },
}

fn feature_format(explicit: Option<&str>, path: &Path) -> Result<FeatureFormat> {
    Ok(match explicit {
        Some(f) => f.parse()?,
        None => FeatureFormat::from_path(path),
    })
}

fn load(path: &Path) -> Result<Vec<ievm::LabeledSample>> {
    load_features(path, FeatureFormat::from_path(path)).with_context(|| format!("reading {}", path.display()))
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth {
            classes,
            per_class,
            dim,
            spread,
            seed,
            out,
            format,
        } => {
            let samples = synth_blobs(classes, per_class, dim, spread, seed)?;
            save_features(&out, &samples, feature_format(format.as_deref(), &out)?)?;
            eprintln!("wrote {} samples to {}", samples.len(), out.display());
        }
        Command::Fit {
            data,
            out,
            model,
            tail_size,
            distance_multiplier,
            metric,
            rejection_threshold,
        } => {
            let samples = load(&data)?;
            let mut m = match model {
                Some(path) => load_model(&path).with_context(|| format!("reading {}", path.display()))?,
                None => EvmModel::new(EvmConfig {
                    tail_size,
                    distance_multiplier,
                    metric: metric.parse::<DistanceMetric>()?,
                    rejection_threshold,
                    ..EvmConfig::default()
                })?,
            };
            let stats = m.partial_fit(&samples)?;
            save_model(&m, &out)?;
            eprintln!(
                "epoch {}: {} extreme vectors, {} re-estimated, {} new",
                m.epoch,
                m.ev_count(),
                stats.flagged_evs,
                stats.new_evs
            );
        }
        Command::Predict {
            model,
            data,
            threshold,
            out,
        } => {
            let m = load_model(&model)?;
            let samples = load(&data)?;
            let delta = threshold.unwrap_or(m.config.rejection_threshold);
            let mut w: Box<dyn Write> = match out {
                Some(path) => Box::new(std::io::BufWriter::new(std::fs::File::create(path)?)),
                None => Box::new(std::io::stdout().lock()),
            };
            writeln!(w, "label,prediction,score")?;
            for s in &samples {
                let p = m.predict_with_threshold(&s.features, delta)?;
                writeln!(w, "{},{},{}", s.label, p.label, p.score)?;
            }
            w.flush()?;
        }
        Command::Reduce {
            model,
            out,
            method,
            budget,
            coverage_threshold,
            bisection_tolerance,
        } => {
            let mut m = load_model(&model)?;
            let need_budget = || budget.context("--budget is required for this method");
            let reduction = match method.as_str() {
                "wksc" => Reduction::Wksc { k: need_budget()? },
                "set-cover" => Reduction::SetCover {
                    zeta: coverage_threshold,
                },
                "set-cover-budget" => Reduction::SetCoverBudget {
                    k: need_budget()?,
                    epsilon: bisection_tolerance,
                },
                other => bail!("unknown reduction method {other:?}"),
            };
            let before = m.ev_count();
            let stats = m.reduce(&reduction)?;
            save_model(&m, &out)?;
            eprintln!(
                "{before} -> {} extreme vectors ({} greedy selections, {} bisection iterations)",
                m.ev_count(),
                stats.greedy_selections,
                stats.bisection_iterations
            );
        }
        Command::Run {
            config,
            out_report,
            format,
        } => {
            let format: ReportFormat = format.parse()?;
            let cfg = ExperimentConfig::load(&config).with_context(|| format!("reading {}", config.display()))?;
            let report = run_experiment(&cfg)?;
            emit_report(&report, &out_report, format)?;
            eprintln!("{} epochs written to {}", report.epochs.len(), out_report.display());
        }
        Command::Convert { input, output, from, to } => {
            let samples = load_features(&input, feature_format(from.as_deref(), &input)?)?;
            save_features(&output, &samples, feature_format(to.as_deref(), &output)?)?;
        }
    }
    Ok(())
}
