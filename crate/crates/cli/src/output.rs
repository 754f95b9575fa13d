//! File emission: long-format series CSV, per-step mean CSV, summary CSV
//! and a JSON mirror of the configuration. Values are written with 17
//! significant digits so reruns are byte-comparable.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use bayesmdp::metrics::{AggregateTable, MetricSeries};

use crate::aggregate::MeanSeries;
use crate::config::{CliError, ExperimentConfig};
use crate::runner::RunRecord;

pub const SERIES_HEADER: &str = "scenario,agent,run_id,t,metric,value";
pub const MEAN_SERIES_HEADER: &str = "scenario,agent,t,metric,value";
pub const SUMMARY_HEADER: &str = "scenario,agent,variant,metric,mean,stderr,n_runs";

/// 17 significant digits, sign and exponent included; bit-exact across
/// reruns of the same build.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn write_atomically(path: &Path, content: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(path))?;
    }
    let mut file = fs::File::create(path).map_err(io_err(path))?;
    file.write_all(content.as_bytes()).map_err(io_err(path))?;
    Ok(())
}

fn push_series_rows(out: &mut String, series: &MetricSeries) {
    for (&t, &v) in series.times.iter().zip(series.values.iter()) {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            series.scenario,
            series.agent,
            series.run_id,
            t,
            series.name,
            format_value(v)
        ));
    }
}

/// Long-format per-run series file. `extra` series (reference curves) are
/// appended after the run records.
pub fn emit_series_csv(
    path: &Path,
    records: &[RunRecord],
    extra: &[MetricSeries],
) -> Result<(), CliError> {
    let mut out = String::from(SERIES_HEADER);
    out.push('\n');
    for record in records {
        for series in &record.series {
            push_series_rows(&mut out, series);
        }
    }
    for series in extra {
        push_series_rows(&mut out, series);
    }
    write_atomically(path, &out)
}

pub fn emit_mean_series_csv(path: &Path, means: &[MeanSeries]) -> Result<(), CliError> {
    let mut out = String::from(MEAN_SERIES_HEADER);
    out.push('\n');
    for series in means {
        for (&t, &v) in series.times.iter().zip(series.values.iter()) {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                series.scenario,
                series.agent,
                t,
                series.metric,
                format_value(v)
            ));
        }
    }
    write_atomically(path, &out)
}

pub fn emit_summary_csv(path: &Path, table: &AggregateTable) -> Result<(), CliError> {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for row in &table.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            row.scenario,
            row.agent,
            row.variant,
            row.metric,
            format_value(row.mean),
            format_value(row.stderr),
            row.n_runs
        ));
    }
    write_atomically(path, &out)
}

pub fn emit_config_json(path: &Path, config: &ExperimentConfig) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(&config.to_json()).expect("config serializes");
    text.push('\n');
    write_atomically(path, &text)
}

/// Standard output file names inside an output directory.
pub struct OutputPaths {
    pub series: PathBuf,
    pub mean_series: PathBuf,
    pub summary: PathBuf,
    pub config: PathBuf,
}

impl OutputPaths {
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            series: dir.join("series.csv"),
            mean_series: dir.join("mean_series.csv"),
            summary: dir.join("summary.csv"),
            config: dir.join("config.json"),
        }
    }
}
