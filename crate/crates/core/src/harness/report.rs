//! Report serialization: JSON mirrors [`RunReport`]; CSV is long format with
//! one row per epoch and FAR target.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::runner::RunReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportFormat {
    Json,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            other => Err(Error::InvalidConfig(format!("unknown report format {other:?}"))),
        }
    }
}

pub const CSV_COLUMNS: [&str; 13] = [
    "epoch",
    "samples_seen",
    "openness",
    "far_target",
    "threshold",
    "far_achieved",
    "dir",
    "ev_count",
    "update_ratio",
    "weibull_refits",
    "distance_evals",
    "greedy_selections",
    "bisection_iterations",
];

pub fn write_report(report: &RunReport, out: impl Write, format: ReportFormat) -> Result<()> {
    match format {
        ReportFormat::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, report)?;
            out.write_all(b"\n")?;
        }
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(CSV_COLUMNS)?;
            for e in &report.epochs {
                let r = &e.dir_far;
                for i in 0..r.far_targets.len() {
                    w.write_record([
                        e.epoch.to_string(),
                        e.samples_seen.to_string(),
                        e.openness.to_string(),
                        r.far_targets[i].to_string(),
                        r.thresholds[i].to_string(),
                        r.far_achieved[i].to_string(),
                        r.dir_values[i].to_string(),
                        e.ev_total.to_string(),
                        e.update_ratio.map(|u| u.to_string()).unwrap_or_default(),
                        e.counters.weibull_refits.to_string(),
                        e.counters.distance_evals.to_string(),
                        e.counters.greedy_selections.to_string(),
                        e.counters.bisection_iterations.to_string(),
                    ])?;
                }
            }
            w.flush()?;
        }
    }
    Ok(())
}

pub fn emit_report(report: &RunReport, path: impl AsRef<Path>, format: ReportFormat) -> Result<()> {
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_report(report, file, format)
}
