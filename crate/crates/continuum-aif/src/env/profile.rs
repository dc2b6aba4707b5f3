//! Device profiles: per-service hardware characteristics the environment
//! samples measurements from.
//!
//! A profile covers the full (resolution x fps x gpu) grid for execution
//! time, a success rate per resolution, and a pixel-shift distribution per
//! fps. Power is modeled as a deterministic base draw plus fixed deltas for
//! an active GPU and an open communication channel.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::EnvError;
use crate::labels::{FPS_LADDER, FPS_LABELS, RESOLUTION_LABELS};

/// Default extra watts drawn by an active GPU when a source has no
/// per-component attribution.
pub const DEFAULT_GPU_POWER_DELTA: f64 = 1.5;
/// Default extra watts drawn by an open communication channel.
pub const DEFAULT_COMM_POWER_DELTA: f64 = 0.5;

/// One execution-time cell: a gaussian over milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gauss {
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceProfile {
    pub name: String,
    pub base_power: f64,
    pub gpu_power_delta: f64,
    pub comm_power_delta: f64,
    /// Indexed `[resolution][fps][gpu as usize]`.
    pub exec_time_table: Vec<Vec<[Gauss; 2]>>,
    /// Probability of a successful delivery per resolution.
    pub success_rate: Vec<f64>,
    /// Pixel-shift distribution per fps.
    pub smoothness_table: Vec<Gauss>,
}

impl DeviceProfile {
    pub fn validate(&self) -> Result<(), EnvError> {
        let fail = |message: String| EnvError::InvalidProfile {
            name: self.name.clone(),
            message,
        };
        if self.base_power < 0.0 || self.gpu_power_delta < 0.0 || self.comm_power_delta < 0.0 {
            return Err(fail("power figures must be non-negative".into()));
        }
        if self.exec_time_table.len() != RESOLUTION_LABELS.len() {
            return Err(fail(format!(
                "execution-time table covers {} resolutions, expected {}",
                self.exec_time_table.len(),
                RESOLUTION_LABELS.len()
            )));
        }
        for (r, row) in self.exec_time_table.iter().enumerate() {
            if row.len() != FPS_LABELS.len() {
                return Err(fail(format!(
                    "execution-time table at resolution {} covers {} fps cells, expected {}",
                    RESOLUTION_LABELS[r],
                    row.len(),
                    FPS_LABELS.len()
                )));
            }
            for cell in row.iter().flatten() {
                if !(cell.mean.is_finite() && cell.std.is_finite()) || cell.std < 0.0 {
                    return Err(fail(format!(
                        "execution-time cell at resolution {} has invalid gaussian",
                        RESOLUTION_LABELS[r]
                    )));
                }
            }
        }
        if self.success_rate.len() != RESOLUTION_LABELS.len()
            || self.success_rate.iter().any(|p| !(0.0..=1.0).contains(p))
        {
            return Err(fail("success rates must cover every resolution in [0,1]".into()));
        }
        if self.smoothness_table.len() != FPS_LABELS.len()
            || self.smoothness_table.iter().any(|g| g.std < 0.0)
        {
            return Err(fail("smoothness table must cover every fps with std >= 0".into()));
        }
        Ok(())
    }

    pub fn exec_cell(&self, resolution: usize, fps: usize, gpu: bool) -> Gauss {
        self.exec_time_table[resolution][fps][gpu as usize]
    }

    /// Total watts drawn given the component states.
    pub fn watts(&self, gpu: bool, comm: bool) -> f64 {
        self.base_power
            + if gpu { self.gpu_power_delta } else { 0.0 }
            + if comm { self.comm_power_delta } else { 0.0 }
    }
}

// Reference grid for the built-in profiles: CPU-path milliseconds per
// (resolution, fps) cell; the GPU path divides by a fixed speedup. The grid
// is calibrated against the 1000/fps deadline with two properties: with the
// GPU on every cell meets its deadline, and every CPU cell that meets its
// deadline sits at worst in the third execution bin, so the load climbs
// into the upper bins only where the deadline is already blown. Heavy
// resolutions fit the CPU path at 12 and 16 fps and miss from 20 fps up.
const EXEC_CPU_MS: [[f64; 5]; 6] = [
    [8.0, 9.0, 10.0, 11.0, 12.0],
    [14.0, 15.0, 17.0, 19.0, 21.0],
    [20.0, 22.0, 24.0, 27.0, 30.0],
    [28.0, 31.0, 34.0, 40.0, 44.0],
    [36.0, 40.0, 53.0, 58.0, 62.0],
    [42.0, 45.0, 60.0, 66.0, 72.0],
];
const GPU_SPEEDUP: f64 = 2.5;
const SUCCESS_RATE: [f64; 6] = [0.70, 0.76, 0.82, 0.88, 0.93, 0.97];
// Pixel shift between consecutive frames: only the lowest frame rate is
// visibly choppy; from 16 fps on the stream reads smooth.
const SMOOTHNESS_MEAN_PX: [f64; 5] = [85.0, 20.0, 15.0, 10.0, 8.0];
const SMOOTHNESS_STD_PX: f64 = 4.0;

fn standard_exec_table(std_frac: f64) -> Vec<Vec<[Gauss; 2]>> {
    EXEC_CPU_MS
        .iter()
        .map(|row| {
            row.iter()
                .map(|cpu_ms| {
                    let make = |gpu: bool| {
                        let mean = cpu_ms / if gpu { GPU_SPEEDUP } else { 1.0 };
                        let std = if std_frac > 0.0 {
                            (std_frac * mean).max(1.0)
                        } else {
                            0.0
                        };
                        Gauss { mean, std }
                    };
                    [make(false), make(true)]
                })
                .collect()
        })
        .collect()
}

fn standard_profile(name: &str, base_power: f64, gpu_delta: f64) -> DeviceProfile {
    DeviceProfile {
        name: name.into(),
        base_power,
        gpu_power_delta: gpu_delta,
        comm_power_delta: DEFAULT_COMM_POWER_DELTA,
        exec_time_table: standard_exec_table(0.08),
        success_rate: SUCCESS_RATE.to_vec(),
        smoothness_table: SMOOTHNESS_MEAN_PX
            .iter()
            .map(|&mean| Gauss {
                mean,
                std: SMOOTHNESS_STD_PX,
            })
            .collect(),
    }
}

/// The device the synthetic backend runs on: the calibrated 6.8 W edge unit
/// with every distribution collapsed to its mean and delivery always
/// succeeding, so that with zero observation noise the environment is fully
/// deterministic.
pub fn synthetic_profile() -> DeviceProfile {
    DeviceProfile {
        name: "synthetic-edge".into(),
        base_power: 6.8,
        gpu_power_delta: DEFAULT_GPU_POWER_DELTA,
        comm_power_delta: DEFAULT_COMM_POWER_DELTA,
        exec_time_table: standard_exec_table(0.0),
        success_rate: vec![1.0; RESOLUTION_LABELS.len()],
        smoothness_table: SMOOTHNESS_MEAN_PX
            .iter()
            .map(|&mean| Gauss { mean, std: 0.0 })
            .collect(),
    }
}

/// Profiles shipped with the simulator, usable without any trace data.
///
/// The 6.8 W worker device is calibrated so that channel and GPU deltas
/// cross the 7 W and 8 W bin thresholds: bare it reads LOW, with the
/// channel open MID, with the GPU on HIGH. The `-lite` pair sits two watts
/// lower so the same deltas keep the device inside its budget until the
/// heavier variant replaces it.
pub fn builtin_profiles() -> Vec<DeviceProfile> {
    vec![
        standard_profile("camera", 5.5, DEFAULT_GPU_POWER_DELTA),
        standard_profile("edge", 6.8, DEFAULT_GPU_POWER_DELTA),
        standard_profile("edge-heavy", 8.8, DEFAULT_GPU_POWER_DELTA),
        standard_profile("edge-lite", 5.3, DEFAULT_GPU_POWER_DELTA),
        standard_profile("edge-lite-heavy", 7.3, DEFAULT_GPU_POWER_DELTA),
        standard_profile("handheld", 6.8, 0.0),
    ]
}

/// JSON document shape for user-supplied profile overrides. Tables are
/// keyed by the ladder labels so partial or mis-labeled documents fail
/// loudly instead of shifting cells.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileDoc {
    pub name: String,
    pub base_power: f64,
    #[serde(default)]
    pub gpu_power_delta: Option<f64>,
    #[serde(default)]
    pub comm_power_delta: Option<f64>,
    /// resolution label -> fps label -> {gpu_off, gpu_on}
    pub exec_time_ms: BTreeMap<String, BTreeMap<String, ExecPairDoc>>,
    /// resolution label -> probability
    pub success_rate: BTreeMap<String, f64>,
    /// fps label -> gaussian
    pub smoothness_px: BTreeMap<String, Gauss>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExecPairDoc {
    pub gpu_off: Gauss,
    pub gpu_on: Gauss,
}

impl ProfileDoc {
    pub fn into_profile(self) -> Result<DeviceProfile, EnvError> {
        let fail = |message: String| EnvError::InvalidProfile {
            name: self.name.clone(),
            message,
        };
        let mut exec_time_table =
            vec![vec![[Gauss { mean: 0.0, std: 0.0 }; 2]; FPS_LABELS.len()]; RESOLUTION_LABELS.len()];
        for (r, res) in RESOLUTION_LABELS.iter().enumerate() {
            let row = self
                .exec_time_ms
                .get(*res)
                .ok_or_else(|| fail(format!("exec_time_ms missing resolution {res}")))?;
            for (f, fps) in FPS_LABELS.iter().enumerate() {
                let cell = row
                    .get(*fps)
                    .ok_or_else(|| fail(format!("exec_time_ms missing fps {fps} at {res}")))?;
                exec_time_table[r][f] = [cell.gpu_off, cell.gpu_on];
            }
        }
        let success_rate = RESOLUTION_LABELS
            .iter()
            .map(|res| {
                self.success_rate
                    .get(*res)
                    .copied()
                    .ok_or_else(|| fail(format!("success_rate missing resolution {res}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let smoothness_table = FPS_LABELS
            .iter()
            .map(|fps| {
                self.smoothness_px
                    .get(*fps)
                    .copied()
                    .ok_or_else(|| fail(format!("smoothness_px missing fps {fps}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let profile = DeviceProfile {
            name: self.name,
            base_power: self.base_power,
            gpu_power_delta: self.gpu_power_delta.unwrap_or(DEFAULT_GPU_POWER_DELTA),
            comm_power_delta: self.comm_power_delta.unwrap_or(DEFAULT_COMM_POWER_DELTA),
            exec_time_table,
            success_rate,
            smoothness_table,
        };
        profile.validate()?;
        Ok(profile)
    }
}

/// Looks up the fps ladder index for a raw frame rate.
pub fn fps_index(raw: u32) -> Option<usize> {
    FPS_LADDER.iter().position(|&f| f == raw)
}

/// Looks up the resolution ladder index for a label such as "480p".
pub fn resolution_index(label: &str) -> Option<usize> {
    RESOLUTION_LABELS.iter().position(|&l| l == label)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_validate_and_calibrate() {
        let profiles = builtin_profiles();
        assert_eq!(profiles.len(), 6);
        for p in &profiles {
            p.validate().unwrap();
        }
        let edge = profiles.iter().find(|p| p.name == "edge").unwrap();
        // Bin thresholds: < 7 LOW, 7..=8 MID, > 8 HIGH.
        assert!(edge.watts(false, false) < 7.0);
        assert!(edge.watts(false, true) >= 7.0 && edge.watts(false, true) <= 8.0);
        assert!(edge.watts(true, false) > 8.0);
        let lite = profiles.iter().find(|p| p.name == "edge-lite").unwrap();
        assert!(lite.watts(true, true) >= 7.0 && lite.watts(true, true) <= 8.0);
        let heavy = profiles.iter().find(|p| p.name == "edge-lite-heavy").unwrap();
        assert!((heavy.base_power - lite.base_power - 2.0).abs() < 1e-12);
        assert!(heavy.watts(false, false) >= 7.0 && heavy.watts(false, false) <= 8.0);
        assert!(heavy.watts(true, false) > 8.0);
    }

    #[test]
    fn doc_round_trip_requires_full_coverage() {
        let mut doc = serde_json::json!({
            "name": "custom",
            "base_power": 6.0,
            "exec_time_ms": {},
            "success_rate": {},
            "smoothness_px": {}
        });
        for res in RESOLUTION_LABELS {
            doc["success_rate"][res] = serde_json::json!(0.9);
            for fps in FPS_LABELS {
                doc["exec_time_ms"][res][fps] = serde_json::json!({
                    "gpu_off": {"mean": 20.0, "std": 2.0},
                    "gpu_on": {"mean": 8.0, "std": 1.0}
                });
            }
        }
        for fps in FPS_LABELS {
            doc["smoothness_px"][fps] = serde_json::json!({"mean": 30.0, "std": 5.0});
        }
        let parsed: ProfileDoc = serde_json::from_value(doc.clone()).unwrap();
        let profile = parsed.into_profile().unwrap();
        assert_eq!(profile.gpu_power_delta, DEFAULT_GPU_POWER_DELTA);
        assert_eq!(profile.exec_cell(0, 0, true).mean, 8.0);

        doc["exec_time_ms"]["480p"]
            .as_object_mut()
            .unwrap()
            .remove("20");
        let parsed: ProfileDoc = serde_json::from_value(doc).unwrap();
        let err = parsed.into_profile().unwrap_err();
        assert!(err.to_string().contains("missing fps 20"));
    }

    #[test]
    fn ladder_lookups() {
        assert_eq!(fps_index(26), Some(3));
        assert_eq!(fps_index(25), None);
        assert_eq!(resolution_index("720p"), Some(5));
        assert_eq!(resolution_index("1080p"), None);
    }
}
