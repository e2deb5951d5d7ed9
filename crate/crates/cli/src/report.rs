//! Artifact writers. The JSON summary and the curve hold no timing, so a
//! rerun with the same config and seed reproduces them byte for byte;
//! wall-clock numbers go into their own file.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use brook_core::eval::{GridReport, MetricAggregate, MetricSnapshot, TrialReport};
use brook_core::types::Hyperparams;

use crate::experiment::ResolvedConfig;

#[derive(Serialize)]
struct Summary<'a> {
    config: &'a ResolvedConfig,
    report: ReplayableReport<'a>,
}

/// The deterministic slice of a trial report.
#[derive(Serialize)]
struct ReplayableReport<'a> {
    trials: usize,
    master_seed: u64,
    aggregate: &'a MetricAggregate,
    finals: &'a [MetricSnapshot],
    curve: &'a [MetricSnapshot],
    stream_checksums: &'a [u64],
}

pub fn write_summary(path: &Path, config: &ResolvedConfig, report: &TrialReport) -> Result<()> {
    let summary = Summary {
        config,
        report: ReplayableReport {
            trials: report.trials,
            master_seed: report.master_seed,
            aggregate: &report.aggregate,
            finals: &report.finals,
            curve: &report.curve,
            stream_checksums: &report.stream_checksums,
        },
    };
    write_json(path, &summary)
}

#[derive(Serialize)]
struct Timing<'a> {
    command: &'a str,
    algorithms: &'a [String],
    /// Seconds inside predict + update, summed over trials.
    learner_seconds: f64,
    /// End-to-end seconds for the whole suite.
    wall_seconds: f64,
}

pub fn write_timing(path: &Path, config: &ResolvedConfig, report: &TrialReport) -> Result<()> {
    write_json(
        path,
        &Timing {
            command: config.command,
            algorithms: &config.algorithms,
            learner_seconds: report.learner_seconds,
            wall_seconds: report.wall_seconds,
        },
    )
}

#[derive(Serialize)]
struct TuneSummary<'a> {
    config: &'a ResolvedConfig,
    report: &'a GridReport,
    /// Hyperparams with the winning value already applied.
    selected: &'a Hyperparams,
}

pub fn write_tune(
    path: &Path,
    config: &ResolvedConfig,
    report: &GridReport,
    selected: &Hyperparams,
) -> Result<()> {
    write_json(
        path,
        &TuneSummary {
            config,
            report,
            selected,
        },
    )
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Trial-averaged learning curve. The config rides along as a comment line
/// so the file stays self-describing.
pub fn write_curve(path: &Path, config: &ResolvedConfig, curve: &[MetricSnapshot]) -> Result<()> {
    let mut file =
        fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    writeln!(file, "# config: {}", serde_json::to_string(config)?)?;
    let mut writer = csv::Writer::from_writer(file);

    let classes = curve
        .first()
        .and_then(|s| s.per_class.as_ref())
        .map_or(0, Vec::len);
    let mut header = vec![
        "round".to_string(),
        "error_rate".to_string(),
        "sensitivity".to_string(),
        "specificity".to_string(),
        "sum".to_string(),
    ];
    for c in 1..=classes {
        header.push(format!("sensitivity_c{c}"));
        header.push(format!("specificity_c{c}"));
        header.push(format!("sum_c{c}"));
    }
    writer.write_record(&header)?;

    for snap in curve {
        let mut row = vec![
            snap.round.to_string(),
            snap.error_rate.to_string(),
            cell(snap.sensitivity),
            cell(snap.specificity),
            cell(snap.weighted),
        ];
        if let Some(per_class) = &snap.per_class {
            for class in per_class {
                row.push(cell(class.sensitivity));
                row.push(cell(class.specificity));
                row.push(cell(class.weighted));
            }
        }
        writer.write_record(&row)?;
    }
    writer
        .flush()
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Undefined metrics become empty cells.
fn cell(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

/// One comparison-table line.
#[derive(Debug)]
pub struct BenchRow {
    pub algorithm: String,
    pub status: String,
    pub error_rate: (Option<f64>, Option<f64>),
    pub sensitivity: (Option<f64>, Option<f64>),
    pub specificity: (Option<f64>, Option<f64>),
    pub weighted: (Option<f64>, Option<f64>),
    pub learner_seconds: Option<f64>,
    pub stream_checksums: String,
}

impl BenchRow {
    pub fn from_report(name: &str, report: &TrialReport) -> Self {
        let a = &report.aggregate;
        BenchRow {
            algorithm: name.to_string(),
            status: "ok".to_string(),
            error_rate: (a.error_rate.mean, a.error_rate.std),
            sensitivity: (a.sensitivity.mean, a.sensitivity.std),
            specificity: (a.specificity.mean, a.specificity.std),
            weighted: (a.weighted.mean, a.weighted.std),
            learner_seconds: Some(report.learner_seconds),
            stream_checksums: checksum_string(&report.stream_checksums),
        }
    }

    pub fn failed(name: &str, reason: &str) -> Self {
        BenchRow {
            algorithm: name.to_string(),
            status: format!("failed: {reason}"),
            error_rate: (None, None),
            sensitivity: (None, None),
            specificity: (None, None),
            weighted: (None, None),
            learner_seconds: None,
            stream_checksums: String::new(),
        }
    }

    pub fn describe(&self) -> String {
        if self.status != "ok" {
            return format!("{}: {}", self.algorithm, self.status);
        }
        format!(
            "{}: error {} sum {} ({:.3}s in the learner)",
            self.algorithm,
            mean_std(self.error_rate),
            mean_std(self.weighted),
            self.learner_seconds.unwrap_or(0.0),
        )
    }
}

fn mean_std((mean, std): (Option<f64>, Option<f64>)) -> String {
    match (mean, std) {
        (Some(m), Some(s)) => format!("{m:.4}+-{s:.4}"),
        _ => "undefined".to_string(),
    }
}

fn checksum_string(checksums: &[u64]) -> String {
    checksums
        .iter()
        .map(|c| format!("{c:016x}"))
        .collect::<Vec<_>>()
        .join("+")
}

pub fn write_bench(path: &Path, config: &ResolvedConfig, rows: &[BenchRow]) -> Result<()> {
    let mut file =
        fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    writeln!(file, "# config: {}", serde_json::to_string(config)?)?;
    let mut writer = csv::Writer::from_writer(file);
    writer.write_record([
        "algorithm",
        "status",
        "error_rate_mean",
        "error_rate_std",
        "sensitivity_mean",
        "sensitivity_std",
        "specificity_mean",
        "specificity_std",
        "sum_mean",
        "sum_std",
        "learner_seconds",
        "stream_checksums",
    ])?;
    for row in rows {
        writer.write_record([
            row.algorithm.clone(),
            row.status.clone(),
            cell(row.error_rate.0),
            cell(row.error_rate.1),
            cell(row.sensitivity.0),
            cell(row.sensitivity.1),
            cell(row.specificity.0),
            cell(row.specificity.1),
            cell(row.weighted.0),
            cell(row.weighted.1),
            cell(row.learner_seconds),
            row.stream_checksums.clone(),
        ])?;
    }
    writer
        .flush()
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn describe_aggregate(aggregate: &MetricAggregate) -> String {
    format!(
        "error {} sensitivity {} specificity {} sum {}",
        mean_std((aggregate.error_rate.mean, aggregate.error_rate.std)),
        mean_std((aggregate.sensitivity.mean, aggregate.sensitivity.std)),
        mean_std((aggregate.specificity.mean, aggregate.specificity.std)),
        mean_std((aggregate.weighted.mean, aggregate.weighted.std)),
    )
}
