//! Experiment harness: runs the three-agent loop across seeded repetitions,
//! aggregates per-step metrics, and measures planning cost.

pub mod artifacts;
pub mod episode;
pub mod metrics;
pub mod timing;

pub use artifacts::{
    artifact_basename, parse_metrics_csv, read_summary_json, write_metrics_csv,
    write_summary_json, SummaryDoc, METRIC_COLUMNS,
};
pub use episode::{run_episode, RunResult, StepRecord, AGENT_NAMES};
pub use metrics::{aggregate, cumulative_rates, AgentSeries, MetricSeries, SloidSeries};
pub use timing::{timing_study, TimingCondition, TimingReport};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::env::{DeviceProfile, RequestMode};
use crate::error::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Expert,
    Learning,
    HardwareSwitchExpert,
    HardwareSwitchLearning,
    CostStudy,
}

impl Scenario {
    pub fn learns(self) -> bool {
        matches!(self, Scenario::Learning | Scenario::HardwareSwitchLearning)
    }

    pub fn switches(self) -> bool {
        matches!(
            self,
            Scenario::HardwareSwitchExpert | Scenario::HardwareSwitchLearning
        )
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Scenario::Expert => "expert",
            Scenario::Learning => "learning",
            Scenario::HardwareSwitchExpert => "hardware_switch_expert",
            Scenario::HardwareSwitchLearning => "hardware_switch_learning",
            Scenario::CostStudy => "cost_study",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    /// Rule-driven dynamics with neighbor-bin observation noise.
    Synthetic,
    /// Measurements sampled from device profiles (built in or trace-derived).
    Trace,
}

/// Everything one experiment needs; hashes of the serialized form tie
/// results back to the exact configuration that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub policy_length: usize,
    pub steps: usize,
    pub repetitions: usize,
    pub seed: u64,
    pub backend: Backend,
    pub request_mode: RequestMode,
    /// Observation noise for the synthetic backend.
    pub epsilon: f64,
    /// Softmax precision over policy EFE scores.
    pub precision: f64,
    pub learning_rate: f64,
    /// Step at which switch scenarios replace the worker's device profile.
    pub switch_step: usize,
    pub producer_profile: String,
    pub worker_profile: String,
    pub consumer_profile: String,
    pub switch_profile: String,
    /// Fixed latency deadline in ms; None derives 1000/fps per step.
    pub deadline_ms: Option<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            scenario: Scenario::Expert,
            policy_length: 3,
            steps: 200,
            repetitions: 10,
            seed: 0,
            backend: Backend::Synthetic,
            request_mode: RequestMode::Static,
            epsilon: 0.05,
            precision: 16.0,
            learning_rate: 1.0,
            switch_step: 75,
            producer_profile: "camera".to_string(),
            worker_profile: "edge-lite".to_string(),
            consumer_profile: "handheld".to_string(),
            switch_profile: "edge-lite-heavy".to_string(),
            deadline_ms: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.policy_length < 1 {
            return Err(HarnessError::InvalidConfig(
                "policy_length must be ≥ 1".to_string(),
            ));
        }
        if self.steps < 1 {
            return Err(HarnessError::InvalidConfig("steps must be ≥ 1".to_string()));
        }
        if self.repetitions < 1 {
            return Err(HarnessError::InvalidConfig(
                "repetitions must be ≥ 1".to_string(),
            ));
        }
        if !(self.epsilon.is_finite() && self.precision.is_finite() && self.precision >= 0.0) {
            return Err(HarnessError::InvalidConfig(
                "epsilon and precision must be finite, precision ≥ 0".to_string(),
            ));
        }
        if self.scenario.learns() && !(self.learning_rate.is_finite() && self.learning_rate > 0.0)
        {
            return Err(HarnessError::InvalidConfig(
                "learning_rate must be positive in learning scenarios".to_string(),
            ));
        }
        if self.scenario.switches() {
            if self.switch_step < 1 || self.switch_step >= self.steps {
                return Err(HarnessError::InvalidConfig(format!(
                    "switch_step must lie in 1..steps, got {} with steps {}",
                    self.switch_step, self.steps
                )));
            }
            if self.backend != Backend::Trace {
                return Err(HarnessError::InvalidConfig(
                    "hardware switch scenarios need backend=trace (device profiles)".to_string(),
                ));
            }
        }
        if let Some(d) = self.deadline_ms {
            if !(d.is_finite() && d > 0.0) {
                return Err(HarnessError::InvalidConfig(
                    "deadline_ms must be positive".to_string(),
                ));
            }
        }
        Ok(())
    }

    /// FNV-1a over the canonical JSON form.
    pub fn hash(&self) -> u64 {
        let json = serde_json::to_string(self).expect("config serializes");
        fnv1a64(json.as_bytes())
    }
}

pub(crate) fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Runs `config.repetitions` episodes with seeds `seed..seed+reps`, spread
/// over at most `jobs` worker threads. Results come back in repetition order
/// regardless of scheduling.
pub fn run_repetitions(
    config: &ExperimentConfig,
    profiles: &[DeviceProfile],
    jobs: usize,
) -> Result<Vec<RunResult>, HarnessError> {
    config.validate()?;
    if config.scenario.switches()
        && !profiles.iter().any(|p| p.name == config.switch_profile)
    {
        return Err(HarnessError::InvalidConfig(format!(
            "switch_profile `{}` is not among the loaded profiles",
            config.switch_profile
        )));
    }

    let jobs = jobs.max(1).min(config.repetitions);
    if jobs == 1 {
        return (0..config.repetitions)
            .map(|rep| run_episode(config, profiles, config.seed.wrapping_add(rep as u64)))
            .collect();
    }

    let mut slots: Vec<Option<Result<RunResult, HarnessError>>> =
        (0..config.repetitions).map(|_| None).collect();
    let next = std::sync::atomic::AtomicUsize::new(0);
    let slots_mutex = std::sync::Mutex::new(&mut slots);
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let rep = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                if rep >= config.repetitions {
                    break;
                }
                let result =
                    run_episode(config, profiles, config.seed.wrapping_add(rep as u64));
                slots_mutex.lock().expect("slot lock")[rep] = Some(result);
            });
        }
    });
    slots
        .into_iter()
        .map(|slot| slot.expect("every repetition ran"))
        .collect()
}

/// Convenience wrapper: repetitions plus their aggregate.
pub fn run_experiment(
    config: &ExperimentConfig,
    profiles: &[DeviceProfile],
    jobs: usize,
) -> Result<(Vec<RunResult>, MetricSeries), HarnessError> {
    let runs = run_repetitions(config, profiles, jobs)?;
    let series = aggregate(&runs)?;
    Ok((runs, series))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_hash_stably() {
        let config = ExperimentConfig::default();
        config.validate().unwrap();
        assert_eq!(config.hash(), config.clone().hash());
        let mut other = config.clone();
        other.seed = 1;
        assert_ne!(config.hash(), other.hash());
    }

    #[test]
    fn invalid_knobs_are_named() {
        let mut config = ExperimentConfig {
            policy_length: 0,
            ..ExperimentConfig::default()
        };
        assert!(matches!(
            config.validate(),
            Err(HarnessError::InvalidConfig(m)) if m.contains("policy_length")
        ));
        config.policy_length = 1;
        config.scenario = Scenario::HardwareSwitchLearning;
        config.backend = Backend::Synthetic;
        assert!(matches!(
            config.validate(),
            Err(HarnessError::InvalidConfig(m)) if m.contains("backend=trace")
        ));
        config.backend = Backend::Trace;
        config.switch_step = 200;
        assert!(config.validate().is_err());
        config.switch_step = 75;
        config.validate().unwrap();
    }

    #[test]
    fn scenario_names_round_trip_via_serde() {
        for s in [
            Scenario::Expert,
            Scenario::Learning,
            Scenario::HardwareSwitchExpert,
            Scenario::HardwareSwitchLearning,
            Scenario::CostStudy,
        ] {
            let json = serde_json::to_string(&s).unwrap();
            assert_eq!(json.trim_matches('"'), s.to_string());
            let back: Scenario = serde_json::from_str(&json).unwrap();
            assert_eq!(back, s);
        }
    }
}
