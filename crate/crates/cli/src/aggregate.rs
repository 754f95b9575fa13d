//! Monte-Carlo aggregation: per-step means across runs and summary rows
//! for per-run scalars.

use bayesmdp::metrics::{mean_and_stderr, AggregateRow, AggregateTable, MetricSeries};

use crate::config::{CliError, ExperimentConfig};
use crate::runner::RunRecord;

/// Per-step mean of one metric across runs.
#[derive(Debug, Clone)]
pub struct MeanSeries {
    pub scenario: String,
    pub agent: String,
    pub metric: String,
    pub times: Vec<u64>,
    pub values: Vec<f64>,
}

impl MeanSeries {
    pub fn value_at(&self, t: u64) -> Option<f64> {
        self.times
            .iter()
            .position(|&x| x == t)
            .map(|i| self.values[i])
    }

    /// View as a [`MetricSeries`] (for the slope estimator).
    pub fn as_metric_series(&self) -> MetricSeries {
        let mut series = MetricSeries::new(&self.scenario, &self.agent, 0, &self.metric);
        for (&t, &v) in self.times.iter().zip(self.values.iter()) {
            series.push(t, v);
        }
        series
    }
}

fn check_homogeneous(records: &[RunRecord]) -> Result<(), CliError> {
    let first = &records[0];
    for record in records.iter().skip(1) {
        if record.series.len() != first.series.len() {
            return Err(CliError::Config(
                "heterogeneous run records: series counts differ".into(),
            ));
        }
        for (a, b) in record.series.iter().zip(first.series.iter()) {
            if a.name != b.name || a.times != b.times || a.scenario != b.scenario {
                return Err(CliError::Config(format!(
                    "heterogeneous run records: series '{}' vs '{}'",
                    a.name, b.name
                )));
            }
        }
        if record.scalars.len() != first.scalars.len() {
            return Err(CliError::Config(
                "heterogeneous run records: scalar sets differ".into(),
            ));
        }
    }
    Ok(())
}

/// Reduce a homogeneous record collection to per-step mean series and a
/// summary table of per-run scalars (mean, standard error, run count).
pub fn aggregate(
    config: &ExperimentConfig,
    records: &[RunRecord],
) -> Result<(AggregateTable, Vec<MeanSeries>), CliError> {
    if records.is_empty() {
        return Err(CliError::Config("no run records to aggregate".into()));
    }
    check_homogeneous(records)?;

    let mut means = Vec::new();
    for (series_idx, series) in records[0].series.iter().enumerate() {
        let mut values = vec![0.0; series.times.len()];
        for record in records {
            for (acc, v) in values.iter_mut().zip(record.series[series_idx].values.iter()) {
                *acc += v;
            }
        }
        for v in values.iter_mut() {
            *v /= records.len() as f64;
        }
        means.push(MeanSeries {
            scenario: series.scenario.clone(),
            agent: series.agent.clone(),
            metric: series.name.clone(),
            times: series.times.clone(),
            values,
        });
    }

    let mut table = AggregateTable::default();
    let variant = config.variant();
    for (scalar_idx, (name, _)) in records[0].scalars.iter().enumerate() {
        let values: Vec<f64> = records.iter().map(|r| r.scalars[scalar_idx].1).collect();
        let (mean, stderr) = mean_and_stderr(&values);
        table.rows.push(AggregateRow {
            scenario: config.scenario.name().to_string(),
            agent: config.agent.as_str().to_string(),
            variant: variant.clone(),
            metric: name.clone(),
            mean,
            stderr,
            n_runs: records.len(),
        });
    }
    Ok((table, means))
}
