//! One seeded episode: three agents planning against a shared pipeline.

use std::time::Instant;

use crate::agents::{build_consumer, build_producer, build_worker, AgentSpec, TransitionModel};
use crate::efe::{plan, ActionSelection, PolicyEvaluation};
use crate::env::{builtin_profiles, DeviceProfile, PipelineEnv, ServiceRole, StepObservations};
use crate::error::HarnessError;
use crate::harness::{Backend, ExperimentConfig};
use crate::policy::{enumerate_policies, Policy};
use crate::space::JointAction;
use crate::transition::TransitionFactorModel;

pub const AGENT_NAMES: [&str; 3] = ["producer", "worker", "consumer"];

/// Everything recorded about one environment step.
#[derive(Debug, Clone)]
pub struct StepRecord {
    /// 1-based step number.
    pub step: usize,
    /// The observations returned by this step, per agent, as label indices.
    pub observations: StepObservations,
    /// The joint actions committed this step, agent order as [`AGENT_NAMES`].
    pub actions: [JointAction; 3],
    /// Score of each agent's selected policy.
    pub selected: [PolicyEvaluation; 3],
    /// SLOiD outcomes evaluated on this step's observations, flattened in
    /// `RunResult::sloid_names` order.
    pub sloid_flags: Vec<bool>,
    /// Wall-clock planning cost per agent in milliseconds: policy scoring and
    /// action selection only. Learning-mode count updates are bookkeeping
    /// between steps and stay outside this measurement.
    pub planning_ms: [f64; 3],
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub seed: u64,
    pub config_hash: u64,
    /// Step at which the worker's device profile was replaced, if any.
    pub switch_step: Option<usize>,
    /// (agent, sloid) pairs naming the columns of `StepRecord::sloid_flags`.
    pub sloid_names: Vec<(String, String)>,
    pub steps: Vec<StepRecord>,
}

struct AgentRuntime {
    spec: AgentSpec,
    policies: Vec<Policy>,
    models: Vec<TransitionFactorModel>,
    null_action: Option<JointAction>,
}

impl AgentRuntime {
    fn new(spec: AgentSpec, policy_length: usize) -> Result<Self, HarnessError> {
        let policies = enumerate_policies(&spec.controls, policy_length)?;
        let models = spec.transition.planning_models()?;
        let null_action = spec.null_action();
        Ok(AgentRuntime {
            spec,
            policies,
            models,
            null_action,
        })
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn build_env(
    config: &ExperimentConfig,
    profiles: &[DeviceProfile],
    seed: u64,
) -> Result<PipelineEnv, HarnessError> {
    let env = match config.backend {
        Backend::Synthetic => {
            PipelineEnv::synthetic(config.epsilon, config.request_mode, seed)?
        }
        Backend::Trace => PipelineEnv::with_profiles(
            profiles,
            &config.producer_profile,
            &config.worker_profile,
            &config.consumer_profile,
            config.request_mode,
            config.deadline_ms,
            seed,
        )?,
    };
    Ok(env)
}

/// Runs one episode under `seed`. Initial environment parameters are drawn
/// from the seed; all three agents plan from each observation and their
/// first actions commit simultaneously.
pub fn run_episode(
    config: &ExperimentConfig,
    profiles: &[DeviceProfile],
    seed: u64,
) -> Result<RunResult, HarnessError> {
    config.validate()?;
    let builtin;
    let profiles = if profiles.is_empty() {
        builtin = builtin_profiles();
        &builtin
    } else {
        profiles
    };

    let mut agents = Vec::with_capacity(3);
    for build in [build_producer, build_worker, build_consumer] {
        let mut spec = build().map_err(HarnessError::from)?;
        if config.scenario.learns() {
            spec = spec.make_learning_variant(1.0)?;
        }
        agents.push(AgentRuntime::new(spec, config.policy_length)?);
    }

    let mut env = build_env(config, profiles, seed)?;
    let mut observations = env.initial_observations();

    let sloid_names: Vec<(String, String)> = agents
        .iter()
        .map(|a| &a.spec)
        .flat_map(|spec| {
            spec.sloids
                .iter()
                .map(|s| (spec.name.clone(), s.name.clone()))
                .collect::<Vec<_>>()
        })
        .collect();

    let mut records = Vec::with_capacity(config.steps);
    for step in 1..=config.steps {
        let with_step = |source: HarnessError| HarnessError::EpisodeStep {
            step,
            source: Box::new(source),
        };

        // Plan all three agents against the current observation.
        let mut actions: [JointAction; 3] = [Vec::new(), Vec::new(), Vec::new()];
        let mut selected = [PolicyEvaluation {
            pragmatic_value: 0.0,
            info_gain: 0.0,
            efe: 0.0,
        }; 3];
        let mut planning_ms = [0.0f64; 3];
        let mut beliefs = Vec::with_capacity(3);
        for (i, agent) in agents.iter().enumerate() {
            let obs = agent_observation(&observations, i);
            let belief = agent.spec.infer_from_indices(obs).map_err(|e| with_step(e.into()))?;
            let plan_seed = splitmix64(seed ^ (step as u64) << 8 ^ i as u64);
            let start = Instant::now();
            let report = plan(
                &agent.policies,
                &belief,
                &agent.models,
                &agent.spec.preferences,
                None,
                &agent.spec.controls,
                config.precision,
                ActionSelection::Deterministic,
                plan_seed,
                agent.null_action.as_ref(),
            )
            .map_err(|e| with_step(e.into()))?;
            planning_ms[i] = start.elapsed().as_secs_f64() * 1e3;
            let evaluation = *report.selected();
            debug_assert!(evaluation.efe.is_finite(), "selected EFE must be finite");
            actions[i] = report.selected_action;
            selected[i] = evaluation;
            beliefs.push(belief);
        }

        // The device swap lands between the planning pass and the step it
        // first affects, so its measurements surface at `switch_step`.
        if config.scenario.switches() && step == config.switch_step {
            env.swap_device(ServiceRole::Worker, &config.switch_profile)
                .map_err(|e| with_step(e.into()))?;
        }

        let next = env
            .step(&actions[0], &actions[1], &actions[2])
            .map_err(|e| with_step(e.into()))?;

        // SLOiD bookkeeping on the fresh observation.
        let mut sloid_flags = Vec::with_capacity(sloid_names.len());
        let mut service_ok = [true; 3];
        for (i, agent) in agents.iter().enumerate() {
            let obs = agent_observation(&next, i);
            let outcomes = agent
                .spec
                .evaluate_sloids(obs)
                .map_err(|e| with_step(e.into()))?;
            for sloid in &agent.spec.sloids {
                let ok = outcomes[&sloid.name];
                service_ok[i] &= ok;
                sloid_flags.push(ok);
            }
        }
        env.set_service_satisfaction(service_ok[1], service_ok[2]);

        // Learning agents fold the observed transition into their counts
        // between steps; the next planning pass sees the refreshed models.
        if config.scenario.learns() {
            for (i, agent) in agents.iter_mut().enumerate() {
                let obs = agent_observation(&next, i);
                let posterior = agent
                    .spec
                    .infer_from_indices(obs)
                    .map_err(|e| with_step(e.into()))?;
                if let TransitionModel::Learning(counts) = &mut agent.spec.transition {
                    for factor_counts in counts.iter_mut() {
                        factor_counts
                            .accumulate(&beliefs[i], &actions[i], &posterior, config.learning_rate)
                            .map_err(|e| with_step(e.into()))?;
                    }
                }
                agent.models = agent
                    .spec
                    .transition
                    .planning_models()
                    .map_err(|e| with_step(e.into()))?;
            }
        }

        records.push(StepRecord {
            step,
            observations: next.clone(),
            actions,
            selected,
            sloid_flags,
            planning_ms,
        });
        observations = next;
    }

    Ok(RunResult {
        seed,
        config_hash: config.hash(),
        switch_step: config.scenario.switches().then_some(config.switch_step),
        sloid_names,
        steps: records,
    })
}

fn agent_observation(observations: &StepObservations, agent: usize) -> &[usize] {
    match agent {
        0 => &observations.producer,
        1 => &observations.worker,
        _ => &observations.consumer,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::Scenario;

    fn tiny_config() -> ExperimentConfig {
        ExperimentConfig {
            policy_length: 1,
            steps: 6,
            repetitions: 2,
            seed: 77,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn episode_records_every_step() {
        let result = run_episode(&tiny_config(), &[], 77).unwrap();
        assert_eq!(result.steps.len(), 6);
        assert_eq!(result.sloid_names.len(), 8);
        for record in &result.steps {
            assert_eq!(record.sloid_flags.len(), 8);
            assert!(record.selected.iter().all(|e| e.efe.is_finite()));
        }
    }

    #[test]
    fn same_seed_reproduces_the_run() {
        let config = tiny_config();
        let a = run_episode(&config, &[], 5).unwrap();
        let b = run_episode(&config, &[], 5).unwrap();
        assert_eq!(a.steps.len(), b.steps.len());
        for (x, y) in a.steps.iter().zip(&b.steps) {
            assert_eq!(x.observations, y.observations);
            assert_eq!(x.actions, y.actions);
            assert_eq!(x.sloid_flags, y.sloid_flags);
            assert_eq!(x.selected, y.selected);
        }
    }

    #[test]
    fn learning_episode_runs_on_the_trace_backend() {
        let config = ExperimentConfig {
            scenario: Scenario::Learning,
            backend: crate::harness::Backend::Trace,
            policy_length: 1,
            steps: 4,
            ..ExperimentConfig::default()
        };
        let result = run_episode(&config, &[], 9).unwrap();
        assert_eq!(result.steps.len(), 4);
    }

    #[test]
    fn switch_scenario_swaps_at_the_configured_step() {
        let config = ExperimentConfig {
            scenario: Scenario::HardwareSwitchExpert,
            backend: crate::harness::Backend::Trace,
            policy_length: 1,
            steps: 10,
            switch_step: 5,
            ..ExperimentConfig::default()
        };
        let result = run_episode(&config, &[], 9).unwrap();
        assert_eq!(result.switch_step, Some(5));
    }
}
