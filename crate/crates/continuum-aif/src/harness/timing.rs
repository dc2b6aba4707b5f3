//! Planning-cost comparison across policy lengths and learning modes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::env::DeviceProfile;
use crate::error::HarnessError;
use crate::harness::{aggregate, run_repetitions, ExperimentConfig, Scenario};

/// Measured planning cost for one (mode, policy length) condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingCondition {
    pub learning: bool,
    pub policy_length: usize,
    /// Mean per-step planning ms per agent.
    pub per_agent_ms: BTreeMap<String, f64>,
    /// Sum of the per-agent means: total planning ms per pipeline step.
    pub per_step_ms: f64,
}

/// Raw per-condition costs plus the ratios the cost story is told in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub pl_low: usize,
    pub pl_high: usize,
    /// Order: expert low, expert high, learning low, learning high.
    pub conditions: Vec<TimingCondition>,
    pub learning_over_expert_low: f64,
    pub learning_over_expert_high: f64,
    pub expert_high_over_low: f64,
}

fn measure(
    config: &ExperimentConfig,
    profiles: &[DeviceProfile],
    learning: bool,
    policy_length: usize,
) -> Result<TimingCondition, HarnessError> {
    let condition = ExperimentConfig {
        scenario: if learning {
            Scenario::Learning
        } else {
            Scenario::Expert
        },
        policy_length,
        ..config.clone()
    };
    // Timing runs stay on one thread to keep measurements comparable.
    let runs = run_repetitions(&condition, profiles, 1)?;
    let series = aggregate(&runs)?;
    let per_step_ms = series.planning_ms.values().sum();
    Ok(TimingCondition {
        learning,
        policy_length,
        per_agent_ms: series.planning_ms,
        per_step_ms,
    })
}

/// Measures all four (expert/learning × short/long horizon) conditions of
/// `config` and reports their per-step planning costs and ratios. The long
/// horizon is `config.policy_length`, or 3 when the config plans one step.
pub fn timing_study(
    config: &ExperimentConfig,
    profiles: &[DeviceProfile],
) -> Result<TimingReport, HarnessError> {
    let pl_low = 1;
    let pl_high = if config.policy_length > 1 {
        config.policy_length
    } else {
        3
    };
    let expert_low = measure(config, profiles, false, pl_low)?;
    let expert_high = measure(config, profiles, false, pl_high)?;
    let learning_low = measure(config, profiles, true, pl_low)?;
    let learning_high = measure(config, profiles, true, pl_high)?;
    let report = TimingReport {
        pl_low,
        pl_high,
        learning_over_expert_low: learning_low.per_step_ms / expert_low.per_step_ms,
        learning_over_expert_high: learning_high.per_step_ms / expert_high.per_step_ms,
        expert_high_over_low: expert_high.per_step_ms / expert_low.per_step_ms,
        conditions: vec![expert_low, expert_high, learning_low, learning_high],
    };
    Ok(report)
}
