//! CSV and JSON result artifacts.
//!
//! The CSV is the deterministic plotting artifact: for a fixed seed its bytes
//! reproduce exactly, so it carries no wall-clock fields. Timings live in the
//! JSON summary alongside the config echo.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::HarnessError;
use crate::harness::episode::{RunResult, AGENT_NAMES};
use crate::harness::metrics::{cumulative_rates, AgentSeries, MetricSeries, SloidSeries};
use crate::harness::timing::TimingReport;
use crate::harness::ExperimentConfig;

/// Column schema of the metrics CSV, one row per repetition × step × SLOiD.
pub const METRIC_COLUMNS: [&str; 12] = [
    "config_hash",
    "rep",
    "step",
    "agent",
    "sloid",
    "fulfilled",
    "rate",
    "efe",
    "rate_mean",
    "rate_std",
    "efe_mean",
    "efe_std",
];

/// `<scenario>_<pl>_<seed>`, the stem shared by an experiment's artifacts.
pub fn artifact_basename(config: &ExperimentConfig) -> String {
    format!("{}_{}_{}", config.scenario, config.policy_length, config.seed)
}

fn io_error(path: &Path, source: std::io::Error) -> HarnessError {
    HarnessError::ArtifactIo {
        path: path.display().to_string(),
        source,
    }
}

fn format_error(path: &Path, message: impl Into<String>) -> HarnessError {
    HarnessError::ArtifactFormat {
        path: path.display().to_string(),
        message: message.into(),
    }
}

fn csv_error(path: &Path, error: csv::Error) -> HarnessError {
    match error.into_kind() {
        csv::ErrorKind::Io(source) => io_error(path, source),
        other => format_error(path, format!("{other:?}")),
    }
}

/// Writes per-repetition rows plus the aggregate columns. `runs` must be the
/// runs `series` was aggregated from.
pub fn write_metrics_csv(
    path: &Path,
    series: &MetricSeries,
    runs: &[RunResult],
) -> Result<(), HarnessError> {
    if runs.is_empty() {
        return Err(format_error(path, "no runs to write"));
    }
    if runs.iter().any(|r| r.config_hash != series.config_hash) {
        return Err(format_error(path, "runs do not match the aggregated series"));
    }
    let mut writer = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    writer
        .write_record(METRIC_COLUMNS)
        .map_err(|e| csv_error(path, e))?;

    let hash = format!("{:016x}", series.config_hash);
    for (rep, run) in runs.iter().enumerate() {
        let rates: Vec<Vec<f64>> = (0..run.sloid_names.len())
            .map(|k| {
                let flags: Vec<bool> = run.steps.iter().map(|s| s.sloid_flags[k]).collect();
                cumulative_rates(&flags)
            })
            .collect();
        for (t, record) in run.steps.iter().enumerate() {
            for (k, (agent, sloid)) in run.sloid_names.iter().enumerate() {
                let agent_idx = AGENT_NAMES
                    .iter()
                    .position(|n| n == agent)
                    .ok_or_else(|| format_error(path, format!("unknown agent `{agent}`")))?;
                writer
                    .write_record([
                        hash.as_str(),
                        &rep.to_string(),
                        &record.step.to_string(),
                        agent,
                        sloid,
                        if record.sloid_flags[k] { "1" } else { "0" },
                        &format!("{}", rates[k][t]),
                        &format!("{}", record.selected[agent_idx].efe),
                        &format!("{}", series.sloids[k].mean[t]),
                        &format!("{}", series.sloids[k].std[t]),
                        &format!("{}", series.agents[agent_idx].efe_mean[t]),
                        &format!("{}", series.agents[agent_idx].efe_std[t]),
                    ])
                    .map_err(|e| csv_error(path, e))?;
            }
        }
    }
    writer.flush().map_err(|e| io_error(path, e))?;
    Ok(())
}

/// Rebuilds the aggregate series from a metrics CSV. Per-repetition columns
/// are validated but only the aggregate ones are returned; `planning_ms`
/// comes back empty because wall-clock never enters the CSV.
pub fn parse_metrics_csv(path: &Path) -> Result<MetricSeries, HarnessError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    if headers.iter().ne(METRIC_COLUMNS) {
        return Err(format_error(
            path,
            format!("unexpected header: {:?}", headers),
        ));
    }

    let mut config_hash: Option<u64> = None;
    let mut steps = 0usize;
    let mut sloid_order: Vec<(String, String)> = Vec::new();
    let mut agent_order: Vec<String> = Vec::new();
    let mut sloid_cells: BTreeMap<(String, String), BTreeMap<usize, (f64, f64)>> = BTreeMap::new();
    let mut agent_cells: BTreeMap<String, BTreeMap<usize, (f64, f64)>> = BTreeMap::new();

    for row in reader.records() {
        let row = row.map_err(|e| csv_error(path, e))?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let field = |i: usize| -> &str { row.get(i).unwrap_or("") };
        let number = |i: usize| -> Result<f64, HarnessError> {
            field(i).parse::<f64>().map_err(|_| {
                format_error(
                    path,
                    format!("line {line}: bad number `{}` in {}", field(i), METRIC_COLUMNS[i]),
                )
            })
        };

        let hash = u64::from_str_radix(field(0), 16)
            .map_err(|_| format_error(path, format!("line {line}: bad config_hash")))?;
        match config_hash {
            None => config_hash = Some(hash),
            Some(h) if h != hash => {
                return Err(format_error(path, format!("line {line}: mixed config_hash")))
            }
            _ => {}
        }
        let step: usize = field(2)
            .parse()
            .map_err(|_| format_error(path, format!("line {line}: bad step")))?;
        if step == 0 {
            return Err(format_error(path, format!("line {line}: step must be ≥ 1")));
        }
        steps = steps.max(step);
        let agent = field(3).to_string();
        let sloid = field(4).to_string();
        let key = (agent.clone(), sloid);
        if !sloid_cells.contains_key(&key) {
            sloid_order.push(key.clone());
        }
        if !agent_order.contains(&agent) {
            agent_order.push(agent.clone());
        }
        // Per-rep columns must at least parse.
        number(6)?;
        number(7)?;
        sloid_cells
            .entry(key)
            .or_default()
            .insert(step, (number(8)?, number(9)?));
        agent_cells
            .entry(agent)
            .or_default()
            .insert(step, (number(10)?, number(11)?));
    }

    let config_hash = config_hash.ok_or_else(|| format_error(path, "no data rows"))?;
    let mut sloids = Vec::with_capacity(sloid_order.len());
    for key in sloid_order {
        let cells = &sloid_cells[&key];
        let mut mean = Vec::with_capacity(steps);
        let mut std = Vec::with_capacity(steps);
        for t in 1..=steps {
            let &(m, s) = cells
                .get(&t)
                .ok_or_else(|| format_error(path, format!("missing step {t} for {key:?}")))?;
            mean.push(m);
            std.push(s);
        }
        sloids.push(SloidSeries {
            agent: key.0,
            sloid: key.1,
            mean,
            std,
        });
    }
    let mut agents = Vec::with_capacity(agent_order.len());
    for agent in agent_order {
        let cells = &agent_cells[&agent];
        let mut efe_mean = Vec::with_capacity(steps);
        let mut efe_std = Vec::with_capacity(steps);
        for t in 1..=steps {
            let &(m, s) = cells
                .get(&t)
                .ok_or_else(|| format_error(path, format!("missing step {t} for agent {agent}")))?;
            efe_mean.push(m);
            efe_std.push(s);
        }
        agents.push(AgentSeries {
            agent,
            efe_mean,
            efe_std,
        });
    }

    Ok(MetricSeries {
        config_hash,
        steps,
        sloids,
        agents,
        planning_ms: BTreeMap::new(),
    })
}

/// Human-facing experiment summary: config echo, final rates, timings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryDoc {
    pub config: ExperimentConfig,
    pub config_hash: String,
    /// agent → SLOiD → mean cumulative rate at the final step.
    pub final_rates: BTreeMap<String, BTreeMap<String, f64>>,
    /// agent → mean per-step planning ms (wall-clock, varies run to run).
    pub planning_ms: BTreeMap<String, f64>,
    /// Present for cost-study runs.
    pub timing: Option<TimingReport>,
}

impl SummaryDoc {
    pub fn from_series(config: &ExperimentConfig, series: &MetricSeries) -> Self {
        let mut final_rates: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
        for s in &series.sloids {
            if let Some(&rate) = s.mean.last() {
                final_rates
                    .entry(s.agent.clone())
                    .or_default()
                    .insert(s.sloid.clone(), rate);
            }
        }
        SummaryDoc {
            config: config.clone(),
            config_hash: format!("{:016x}", series.config_hash),
            final_rates,
            planning_ms: series.planning_ms.clone(),
            timing: None,
        }
    }

    pub fn from_timing(config: &ExperimentConfig, report: &TimingReport) -> Self {
        SummaryDoc {
            config: config.clone(),
            config_hash: format!("{:016x}", config.hash()),
            final_rates: BTreeMap::new(),
            planning_ms: BTreeMap::new(),
            timing: Some(report.clone()),
        }
    }
}

pub fn write_summary_json(path: &Path, summary: &SummaryDoc) -> Result<(), HarnessError> {
    let json = serde_json::to_string_pretty(summary)
        .map_err(|e| format_error(path, format!("serialize: {e}")))?;
    let mut file = std::fs::File::create(path).map_err(|e| io_error(path, e))?;
    file.write_all(json.as_bytes())
        .and_then(|_| file.write_all(b"\n"))
        .map_err(|e| io_error(path, e))
}

pub fn read_summary_json(path: &Path) -> Result<SummaryDoc, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    serde_json::from_str(&text).map_err(|e| format_error(path, format!("parse: {e}")))
}
