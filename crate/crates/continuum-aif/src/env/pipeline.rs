//! The shared three-service pipeline: one camera configuration, two
//! communication channels, one GPU switch, and the measurement process that
//! turns the joint state into per-agent observations.
//!
//! Measurements always come from the active device profiles: execution time
//! per (resolution, fps, gpu) cell, watts as base power plus per-component
//! deltas, delivery success per resolution, pixel shift per fps. Latency is
//! derived, not sampled: a step is in time iff its execution time fits the
//! per-batch deadline for the current frame rate. The synthetic backend runs
//! the same arithmetic on a built-in deterministic device and injects
//! neighbor-bin observation noise instead of distributional spread.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::env::profile::{synthetic_profile, DeviceProfile};
use crate::env::{consumption_bin, exec_time_bin, smoothness_bin};
use crate::error::EnvError;
use crate::labels::{
    step_down, step_up, CHANGE_DECREASE, CHANGE_INCREASE, CHANGE_STAY, FPS_LABELS, FPS_LADDER,
    RESOLUTION_LABELS, SMOOTHNESS_MID, SWITCH_OFF, SWITCH_ON, TOGGLE_DISABLE, TOGGLE_ENABLE,
};
use crate::space::JointAction;

/// Camera configuration as ladder indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VideoConfig {
    pub fps: usize,
    pub resolution: usize,
}

/// Pending inter-agent requests, one per channel-carried signal, as
/// Increase/Stay/Decrease indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RequestBundle {
    pub worker_fps: usize,
    pub consumer_fps: usize,
    pub consumer_resolution: usize,
}

/// How an open channel translates into a request.
///
/// Both modes keep the fixed directions (worker asks Decrease, consumer asks
/// Increase) and differ in when a request is muted into Stay: `Static` mutes
/// a request while the measured quantity its target drives already meets the
/// issuing service's need; `NeedDriven` mutes the whole channel while its
/// owner reported all objectives fulfilled at the last evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RequestMode {
    Static,
    NeedDriven,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ServiceRole {
    Producer,
    Worker,
    Consumer,
}

/// Index vectors aligned with each agent's observation modality order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepObservations {
    /// [WF, CF, CR, FPS, Resolution]
    pub producer: Vec<usize>,
    /// [Latency, ExecTime, FPS, W-consumption, ShareInfo, GPU]
    pub worker: Vec<usize>,
    /// [Success, Smoothness, C-consumption, FPS, Resolution, ShareInfo]
    pub consumer: Vec<usize>,
}

/// Current values of the six measured quantities, already binned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct MetricBins {
    latency: bool,
    exec_bin: usize,
    w_bin: usize,
    success: bool,
    smooth_bin: usize,
    c_bin: usize,
}

#[derive(Debug, Clone)]
enum Mode {
    /// Built-in deterministic device; stochasticity enters only as
    /// neighbor-bin observation noise.
    Synthetic { epsilon: f64 },
    /// Measurements sampled from caller-supplied device profiles.
    Profiles,
}

#[derive(Debug, Clone)]
pub struct PipelineEnv {
    mode: Mode,
    profiles: BTreeMap<String, DeviceProfile>,
    /// Active profile per service, indexed by `ServiceRole as usize`.
    active: [Option<DeviceProfile>; 3],
    video: VideoConfig,
    worker_comm: bool,
    consumer_comm: bool,
    gpu_on: bool,
    metrics: MetricBins,
    requests: RequestBundle,
    request_mode: RequestMode,
    worker_satisfied: bool,
    consumer_satisfied: bool,
    deadline_override_ms: Option<f64>,
    rng: ChaCha8Rng,
    step_index: u64,
}

impl PipelineEnv {
    /// Self-contained environment on the built-in deterministic device;
    /// `epsilon` is the per-metric probability of observing a neighboring
    /// bin instead of the true one.
    pub fn synthetic(
        epsilon: f64,
        request_mode: RequestMode,
        seed: u64,
    ) -> Result<Self, EnvError> {
        if !(0.0..0.5).contains(&epsilon) {
            return Err(EnvError::NoiseOutOfRange { epsilon });
        }
        let mut env = Self::bare(Mode::Synthetic { epsilon }, request_mode, None, seed);
        let device = synthetic_profile();
        env.active = [Some(device.clone()), Some(device.clone()), Some(device.clone())];
        env.profiles.insert(device.name.clone(), device);
        env.randomize_initial_state();
        Ok(env)
    }

    /// Profile-sampled environment. Each service is bound to a named profile
    /// from `profiles`; measurements draw from the bound tables.
    pub fn with_profiles(
        profiles: &[DeviceProfile],
        producer: &str,
        worker: &str,
        consumer: &str,
        request_mode: RequestMode,
        deadline_override_ms: Option<f64>,
        seed: u64,
    ) -> Result<Self, EnvError> {
        let mut map = BTreeMap::new();
        for profile in profiles {
            profile.validate()?;
            map.insert(profile.name.clone(), profile.clone());
        }
        let lookup = |name: &str| -> Result<DeviceProfile, EnvError> {
            map.get(name).cloned().ok_or_else(|| EnvError::UnknownProfile {
                name: name.to_string(),
            })
        };
        let mut env = Self::bare(Mode::Profiles, request_mode, deadline_override_ms, seed);
        env.active = [
            Some(lookup(producer)?),
            Some(lookup(worker)?),
            Some(lookup(consumer)?),
        ];
        env.profiles = map;
        env.randomize_initial_state();
        Ok(env)
    }

    fn bare(
        mode: Mode,
        request_mode: RequestMode,
        deadline_override_ms: Option<f64>,
        seed: u64,
    ) -> Self {
        PipelineEnv {
            mode,
            profiles: BTreeMap::new(),
            active: [None, None, None],
            video: VideoConfig {
                fps: 0,
                resolution: 0,
            },
            worker_comm: false,
            consumer_comm: false,
            gpu_on: false,
            metrics: MetricBins {
                latency: false,
                exec_bin: 0,
                w_bin: 0,
                success: false,
                smooth_bin: 0,
                c_bin: 0,
            },
            requests: RequestBundle {
                worker_fps: CHANGE_STAY,
                consumer_fps: CHANGE_STAY,
                consumer_resolution: CHANGE_STAY,
            },
            request_mode,
            worker_satisfied: false,
            consumer_satisfied: false,
            deadline_override_ms,
            rng: ChaCha8Rng::seed_from_u64(seed),
            step_index: 0,
        }
    }

    /// Draws the five shared parameters, then takes the initial measurements.
    fn randomize_initial_state(&mut self) {
        self.video.fps = self.rng.gen_range(0..FPS_LABELS.len());
        self.video.resolution = self.rng.gen_range(0..RESOLUTION_LABELS.len());
        self.worker_comm = self.rng.gen_bool(0.5);
        self.consumer_comm = self.rng.gen_bool(0.5);
        self.gpu_on = self.rng.gen_bool(0.5);
        self.sample_profile_metrics();
        self.requests = self.route_requests();
    }

    /// The observation the agents see before acting for the first time.
    pub fn initial_observations(&mut self) -> StepObservations {
        self.observe()
    }

    /// Applies the three joint actions simultaneously, advances the pipeline
    /// one step, and returns the fresh per-agent observations.
    pub fn step(
        &mut self,
        producer: &JointAction,
        worker: &JointAction,
        consumer: &JointAction,
    ) -> Result<StepObservations, EnvError> {
        validate_action("producer", producer, &[3, 3])?;
        validate_action("worker", worker, &[3, 3])?;
        validate_action("consumer", consumer, &[3])?;

        self.video.fps = apply_change(self.video.fps, FPS_LABELS.len(), producer[0]);
        self.video.resolution =
            apply_change(self.video.resolution, RESOLUTION_LABELS.len(), producer[1]);

        self.gpu_on = match worker[0] {
            SWITCH_ON => true,
            SWITCH_OFF => false,
            _ => self.gpu_on,
        };
        self.worker_comm = match worker[1] {
            TOGGLE_ENABLE => true,
            TOGGLE_DISABLE => false,
            _ => self.worker_comm,
        };
        self.consumer_comm = match consumer[0] {
            TOGGLE_ENABLE => true,
            TOGGLE_DISABLE => false,
            _ => self.consumer_comm,
        };

        self.sample_profile_metrics();
        self.requests = self.route_requests();
        self.step_index += 1;
        Ok(self.observe())
    }

    fn sample_profile_metrics(&mut self) {
        let worker = self.active[ServiceRole::Worker as usize]
            .as_ref()
            .expect("constructors bind a worker profile");
        let consumer = self.active[ServiceRole::Consumer as usize]
            .as_ref()
            .expect("constructors bind a consumer profile");

        let cell = worker.exec_cell(self.video.resolution, self.video.fps, self.gpu_on);
        let exec_ms = sample_gauss(&mut self.rng, cell.mean, cell.std).max(0.0);
        let watts = worker.watts(self.gpu_on, self.worker_comm);

        let success = self
            .rng
            .gen_bool(consumer.success_rate[self.video.resolution].clamp(0.0, 1.0));
        let smooth_cell = consumer.smoothness_table[self.video.fps];
        let smooth_px = sample_gauss(&mut self.rng, smooth_cell.mean, smooth_cell.std).max(0.0);
        let consumer_watts = consumer.watts(false, self.consumer_comm);

        self.metrics = MetricBins {
            latency: exec_ms <= self.deadline_ms(),
            exec_bin: exec_time_bin(exec_ms),
            w_bin: consumption_bin(watts),
            success,
            smooth_bin: smoothness_bin(smooth_px),
            c_bin: consumption_bin(consumer_watts),
        };
    }

    fn route_requests(&self) -> RequestBundle {
        // An open channel carries its fixed direction only while the issuing
        // service still needs the change. Static mode gates each request on
        // the freshly measured quantity its target drives: the worker asks
        // for lower fps only while the deadline is being missed, the consumer
        // asks for higher fps only while pixel shift sits beyond the MID bin
        // and for higher resolution only while delivery is failing.
        // Need-driven mode instead mutes the whole channel while its owner
        // reported every objective fulfilled at the last evaluation.
        let (worker_asks, consumer_fps_asks, consumer_res_asks) = match self.request_mode {
            RequestMode::Static => (
                self.worker_comm && !self.metrics.latency,
                self.consumer_comm && self.metrics.smooth_bin > SMOOTHNESS_MID,
                self.consumer_comm && !self.metrics.success,
            ),
            RequestMode::NeedDriven => (
                self.worker_comm && !self.worker_satisfied,
                self.consumer_comm && !self.consumer_satisfied,
                self.consumer_comm && !self.consumer_satisfied,
            ),
        };
        RequestBundle {
            worker_fps: if worker_asks { CHANGE_DECREASE } else { CHANGE_STAY },
            consumer_fps: if consumer_fps_asks { CHANGE_INCREASE } else { CHANGE_STAY },
            consumer_resolution: if consumer_res_asks { CHANGE_INCREASE } else { CHANGE_STAY },
        }
    }

    fn observe(&mut self) -> StepObservations {
        let mut m = self.metrics;
        if let Mode::Synthetic { epsilon } = self.mode {
            m.latency = noisy_flag(&mut self.rng, m.latency, epsilon);
            m.exec_bin = noisy_bin(&mut self.rng, m.exec_bin, 5, epsilon);
            m.w_bin = noisy_bin(&mut self.rng, m.w_bin, 3, epsilon);
            m.success = noisy_flag(&mut self.rng, m.success, epsilon);
            m.smooth_bin = noisy_bin(&mut self.rng, m.smooth_bin, 5, epsilon);
            m.c_bin = noisy_bin(&mut self.rng, m.c_bin, 3, epsilon);
        }
        StepObservations {
            producer: vec![
                self.requests.worker_fps,
                self.requests.consumer_fps,
                self.requests.consumer_resolution,
                self.video.fps,
                self.video.resolution,
            ],
            worker: vec![
                m.latency as usize,
                m.exec_bin,
                self.video.fps,
                m.w_bin,
                self.worker_comm as usize,
                self.gpu_on as usize,
            ],
            consumer: vec![
                m.success as usize,
                m.smooth_bin,
                m.c_bin,
                self.video.fps,
                self.video.resolution,
                self.consumer_comm as usize,
            ],
        }
    }

    /// Feeds back whether each requesting service met all its objectives at
    /// the last evaluation; only the need-driven request mode consults this.
    pub fn set_service_satisfaction(&mut self, worker: bool, consumer: bool) {
        self.worker_satisfied = worker;
        self.consumer_satisfied = consumer;
    }

    /// Replaces a service's active device profile; configuration and channel
    /// states persist.
    pub fn swap_device(&mut self, service: ServiceRole, profile: &str) -> Result<(), EnvError> {
        let new = self
            .profiles
            .get(profile)
            .cloned()
            .ok_or_else(|| EnvError::UnknownProfile {
                name: profile.to_string(),
            })?;
        self.active[service as usize] = Some(new);
        Ok(())
    }

    pub fn deadline_ms(&self) -> f64 {
        self.deadline_override_ms
            .unwrap_or(1000.0 / FPS_LADDER[self.video.fps] as f64)
    }

    pub fn video(&self) -> VideoConfig {
        self.video
    }

    pub fn requests(&self) -> RequestBundle {
        self.requests
    }

    pub fn worker_comm(&self) -> bool {
        self.worker_comm
    }

    pub fn consumer_comm(&self) -> bool {
        self.consumer_comm
    }

    pub fn gpu_on(&self) -> bool {
        self.gpu_on
    }

    pub fn step_index(&self) -> u64 {
        self.step_index
    }
}

fn validate_action(service: &str, action: &JointAction, cards: &[usize]) -> Result<(), EnvError> {
    if action.len() != cards.len() {
        return Err(EnvError::InvalidAction {
            service: service.to_string(),
            message: format!("expected {} controls, got {}", cards.len(), action.len()),
        });
    }
    for (i, (&a, &card)) in action.iter().zip(cards).enumerate() {
        if a >= card {
            return Err(EnvError::InvalidAction {
                service: service.to_string(),
                message: format!("control {i} value {a} out of range 0..{card}"),
            });
        }
    }
    Ok(())
}

fn apply_change(value: usize, card: usize, change: usize) -> usize {
    match change {
        CHANGE_INCREASE => step_up(value, card),
        CHANGE_DECREASE => step_down(value),
        _ => value,
    }
}

fn sample_gauss(rng: &mut ChaCha8Rng, mean: f64, std: f64) -> f64 {
    Normal::new(mean, std)
        .expect("profile validation guarantees std >= 0")
        .sample(rng)
}

/// With probability `epsilon`, replaces `bin` by a uniformly chosen
/// neighboring bin. The coin is always tossed so runs with different
/// `epsilon` share their underlying truth trajectory draw-for-draw.
fn noisy_bin(rng: &mut ChaCha8Rng, bin: usize, card: usize, epsilon: f64) -> usize {
    let flip: f64 = rng.gen();
    if flip >= epsilon {
        return bin;
    }
    let lower = bin > 0;
    let upper = bin + 1 < card;
    match (lower, upper) {
        (true, true) => {
            if rng.gen_bool(0.5) {
                bin - 1
            } else {
                bin + 1
            }
        }
        (true, false) => bin - 1,
        (false, true) => bin + 1,
        (false, false) => bin,
    }
}

fn noisy_flag(rng: &mut ChaCha8Rng, flag: bool, epsilon: f64) -> bool {
    noisy_bin(rng, flag as usize, 2, epsilon) == 1
}
