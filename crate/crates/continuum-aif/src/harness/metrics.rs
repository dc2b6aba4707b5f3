//! Aggregation of run results into per-step metric series.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::HarnessError;
use crate::harness::episode::{RunResult, AGENT_NAMES};

/// Cumulative fulfillment rate of one SLOiD, mean and population std across
/// repetitions, indexed by step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SloidSeries {
    pub agent: String,
    pub sloid: String,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

/// Selected-policy EFE of one agent, mean and population std across
/// repetitions, indexed by step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSeries {
    pub agent: String,
    pub efe_mean: Vec<f64>,
    pub efe_std: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSeries {
    /// Hash of the configuration all aggregated runs shared.
    pub config_hash: u64,
    pub steps: usize,
    pub sloids: Vec<SloidSeries>,
    pub agents: Vec<AgentSeries>,
    /// Mean per-step planning cost per agent in milliseconds. Wall-clock:
    /// excluded from deterministic artifacts.
    pub planning_ms: BTreeMap<String, f64>,
}

/// Running fraction of fulfilled steps, via the exact recurrence
/// `rate(t) = (rate(t-1)*(t-1) + fulfilled(t)) / t`.
pub fn cumulative_rates(flags: &[bool]) -> Vec<f64> {
    let mut rates = Vec::with_capacity(flags.len());
    let mut rate = 0.0f64;
    for (i, &f) in flags.iter().enumerate() {
        let t = (i + 1) as f64;
        rate = (rate * (t - 1.0) + f as u8 as f64) / t;
        rates.push(rate);
    }
    rates
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Collapses homogeneous runs into per-step means and stds.
pub fn aggregate(runs: &[RunResult]) -> Result<MetricSeries, HarnessError> {
    let first = runs.first().ok_or(HarnessError::EmptyAggregate)?;
    for run in runs {
        if run.config_hash != first.config_hash {
            return Err(HarnessError::MixedRuns {
                first: format!("{:016x}", first.config_hash),
                other: format!("{:016x}", run.config_hash),
            });
        }
    }
    let steps = first.steps.len();
    debug_assert!(runs.iter().all(|r| r.steps.len() == steps));

    // Per run and SLOiD, the cumulative series; then fold across runs.
    let mut sloids = Vec::with_capacity(first.sloid_names.len());
    for (k, (agent, sloid)) in first.sloid_names.iter().enumerate() {
        let per_run: Vec<Vec<f64>> = runs
            .iter()
            .map(|run| {
                let flags: Vec<bool> = run.steps.iter().map(|s| s.sloid_flags[k]).collect();
                cumulative_rates(&flags)
            })
            .collect();
        let mut mean = Vec::with_capacity(steps);
        let mut std = Vec::with_capacity(steps);
        for t in 0..steps {
            let at_t: Vec<f64> = per_run.iter().map(|series| series[t]).collect();
            let (m, s) = mean_std(&at_t);
            mean.push(m);
            std.push(s);
        }
        sloids.push(SloidSeries {
            agent: agent.clone(),
            sloid: sloid.clone(),
            mean,
            std,
        });
    }

    let mut agents = Vec::with_capacity(AGENT_NAMES.len());
    for (i, name) in AGENT_NAMES.iter().enumerate() {
        let mut efe_mean = Vec::with_capacity(steps);
        let mut efe_std = Vec::with_capacity(steps);
        for t in 0..steps {
            let at_t: Vec<f64> = runs.iter().map(|run| run.steps[t].selected[i].efe).collect();
            let (m, s) = mean_std(&at_t);
            efe_mean.push(m);
            efe_std.push(s);
        }
        agents.push(AgentSeries {
            agent: name.to_string(),
            efe_mean,
            efe_std,
        });
    }

    let mut planning_ms = BTreeMap::new();
    for (i, name) in AGENT_NAMES.iter().enumerate() {
        let total: f64 = runs
            .iter()
            .flat_map(|run| run.steps.iter().map(move |s| s.planning_ms[i]))
            .sum();
        planning_ms.insert(name.to_string(), total / (runs.len() * steps) as f64);
    }

    Ok(MetricSeries {
        config_hash: first.config_hash,
        steps,
        sloids,
        agents,
        planning_ms,
    })
}
