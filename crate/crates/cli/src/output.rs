//! CSV emission and per-grid-point summaries.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::experiment::{compute, Metric, Outcome, ResultRow, CSV_HEADER};
use crate::svg;

pub const SUMMARY_HEADER: &str = "preset,algorithm,n,metric,mean,std,count";

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub algorithm: &'static str,
    pub n: usize,
    pub metric: Metric,
    /// Mean over the finite values; NaN when there are none.
    pub mean: f64,
    /// Sample standard deviation (zero for a single value).
    pub std: f64,
    pub count: usize,
}

/// Group rows by `(algorithm, metric, n)` in order of first appearance.
pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut index: HashMap<(&'static str, Metric, usize), usize> = HashMap::new();
    let mut groups: Vec<((&'static str, Metric, usize), Vec<f64>)> = Vec::new();
    for r in rows {
        let key = (r.algorithm, r.metric, r.n);
        let slot = *index.entry(key).or_insert_with(|| {
            groups.push((key, Vec::new()));
            groups.len() - 1
        });
        if r.value.is_finite() {
            groups[slot].1.push(r.value);
        }
    }
    groups
        .into_iter()
        .map(|((algorithm, metric, n), values)| {
            let count = values.len();
            let mean = values.iter().sum::<f64>() / count as f64;
            let std = if count > 1 {
                let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
                (ss / (count - 1) as f64).sqrt()
            } else if count == 1 {
                0.0
            } else {
                f64::NAN
            };
            SummaryRow {
                algorithm,
                n,
                metric,
                mean,
                std,
                count,
            }
        })
        .collect()
}

pub fn rows_csv(rows: &[ResultRow]) -> String {
    let mut out = String::with_capacity(48 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv());
        out.push('\n');
    }
    out
}

pub fn summary_csv(preset: &str, summary: &[SummaryRow]) -> String {
    let mut out = format!("{SUMMARY_HEADER}\n");
    for s in summary {
        writeln!(
            out,
            "{preset},{},{},{},{},{},{}",
            s.algorithm,
            s.n,
            s.metric.name(),
            s.mean,
            s.std,
            s.count
        )
        .unwrap();
    }
    out
}

/// Paths of everything a run wrote.
#[derive(Debug, Clone)]
pub struct ResultFiles {
    pub raw: PathBuf,
    pub summary: PathBuf,
    pub timing: PathBuf,
    pub charts: Vec<PathBuf>,
    pub report: Option<PathBuf>,
}

fn write(path: PathBuf, contents: &str) -> Result<PathBuf> {
    fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

pub fn write_outcome(cfg: &ExperimentConfig, outcome: &Outcome, dir: &Path) -> Result<ResultFiles> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let preset = cfg.preset.name();
    let raw = write(dir.join("raw.csv"), &rows_csv(&outcome.rows))?;
    let timing = write(dir.join("timing.csv"), &rows_csv(&outcome.timings))?;
    let summary_rows = summarize(&outcome.rows);
    let summary = write(dir.join("summary.csv"), &summary_csv(preset, &summary_rows))?;

    let mut metrics: Vec<Metric> = summary_rows.iter().map(|s| s.metric).collect();
    metrics.sort_unstable();
    metrics.dedup();
    let mut charts = Vec::new();
    for metric in metrics {
        let series: Vec<_> = summary_rows.iter().filter(|s| s.metric == metric).collect();
        let title = format!("{preset}: {}", metric.name());
        let doc = svg::line_chart(&title, "n", metric.name(), &series);
        charts.push(write(dir.join(format!("{}.svg", metric.name())), &doc)?);
    }
    let report = if outcome.report.is_empty() {
        None
    } else {
        Some(write(
            dir.join("design_report.txt"),
            &(outcome.report.join("\n") + "\n"),
        )?)
    };
    Ok(ResultFiles {
        raw,
        summary,
        timing,
        charts,
        report,
    })
}

/// Run the configured experiment and write its files under `output_dir`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<(Outcome, ResultFiles)> {
    // fail on an unwritable directory before spending time on the reps
    fs::create_dir_all(&cfg.output_dir).map_err(|e| CliError::io(&cfg.output_dir, e))?;
    let outcome = compute(cfg)?;
    let files = write_outcome(cfg, &outcome, &cfg.output_dir)?;
    Ok((outcome, files))
}
