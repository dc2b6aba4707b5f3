//! Trace ingestion: turns benchmark CSV recordings into device profiles.
//!
//! Records are grouped by device, aggregated into per-(resolution, fps, gpu)
//! gaussians, and fps gaps are filled by averaging the immediately
//! neighboring recorded cells. A gap with no recorded fps neighbor aborts
//! ingestion; silent extrapolation would corrupt downstream runs.

use std::collections::BTreeMap;
use std::path::Path;

use crate::env::profile::{
    fps_index, resolution_index, DeviceProfile, Gauss, DEFAULT_COMM_POWER_DELTA,
    DEFAULT_GPU_POWER_DELTA,
};
use crate::error::EnvError;
use crate::labels::{FPS_LABELS, RESOLUTION_LABELS};

pub const TRACE_COLUMNS: [&str; 10] = [
    "execution_time_ms",
    "cpu_util",
    "memory_mb",
    "energy_w",
    "resolution",
    "fps",
    "success",
    "smoothness_px",
    "device_type",
    "gpu",
];

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub execution_time_ms: f64,
    pub cpu_util: f64,
    pub memory_mb: f64,
    pub energy_w: f64,
    /// Ladder index, not the label.
    pub resolution: usize,
    /// Ladder index, not the raw frame rate.
    pub fps: usize,
    pub success: bool,
    pub smoothness_px: f64,
    pub device_type: String,
    pub gpu: bool,
}

/// Per-device summary of how much of the measurement grid the trace covers.
#[derive(Debug, Clone)]
pub struct CoverageReport {
    pub device: String,
    pub recorded_cells: usize,
    pub total_cells: usize,
    /// Cells absent from the trace, filled by fps-neighbor interpolation:
    /// (resolution label, fps label, gpu).
    pub filled: Vec<(String, String, bool)>,
}

pub fn read_trace_records(path: &Path) -> Result<Vec<TraceRecord>, EnvError> {
    let shown_path = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| map_open_error(&shown_path, e))?;

    let headers = reader
        .headers()
        .map_err(|e| malformed(&shown_path, 1, e.to_string()))?
        .clone();
    let mut column_at = BTreeMap::new();
    for (idx, header) in headers.iter().enumerate() {
        if TRACE_COLUMNS.contains(&header) {
            column_at.insert(header.to_string(), idx);
        } else {
            log::warn!("trace file {shown_path}: ignoring unknown column `{header}`");
        }
    }
    for required in TRACE_COLUMNS {
        if !column_at.contains_key(required) {
            return Err(EnvError::MissingColumn {
                path: shown_path,
                column: required.into(),
            });
        }
    }

    let mut records = Vec::new();
    for row in reader.records() {
        let row = match row {
            Ok(row) => row,
            Err(e) => {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                return Err(malformed(&shown_path, line, e.to_string()));
            }
        };
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let field = |name: &str| row.get(column_at[name]).unwrap_or("");
        let float = |name: &str| -> Result<f64, EnvError> {
            let raw = field(name);
            let value: f64 = raw
                .parse()
                .map_err(|_| malformed(&shown_path, line, format!("{name} `{raw}` is not a number")))?;
            if value < 0.0 {
                return Err(malformed(&shown_path, line, format!("{name} is negative")));
            }
            Ok(value)
        };
        let flag = |name: &str| -> Result<bool, EnvError> {
            match field(name).to_ascii_lowercase().as_str() {
                "0" | "false" => Ok(false),
                "1" | "true" => Ok(true),
                raw => Err(malformed(
                    &shown_path,
                    line,
                    format!("{name} `{raw}` is not a 0/1 flag"),
                )),
            }
        };

        let resolution_raw = field("resolution");
        let resolution = resolution_index(resolution_raw).ok_or_else(|| {
            malformed(
                &shown_path,
                line,
                format!("resolution `{resolution_raw}` is not on the ladder"),
            )
        })?;
        let fps_raw = field("fps");
        let fps = fps_raw
            .parse::<u32>()
            .ok()
            .and_then(fps_index)
            .ok_or_else(|| {
                malformed(
                    &shown_path,
                    line,
                    format!("fps `{fps_raw}` is not on the ladder"),
                )
            })?;

        records.push(TraceRecord {
            execution_time_ms: float("execution_time_ms")?,
            cpu_util: float("cpu_util")?,
            memory_mb: float("memory_mb")?,
            energy_w: float("energy_w")?,
            resolution,
            fps,
            success: flag("success")?,
            smoothness_px: float("smoothness_px")?,
            device_type: field("device_type").to_string(),
            gpu: flag("gpu")?,
        });
    }
    if records.is_empty() {
        return Err(EnvError::EmptyTrace { path: shown_path });
    }
    Ok(records)
}

pub fn ingest_traces(path: &Path) -> Result<Vec<DeviceProfile>, EnvError> {
    ingest_traces_with_report(path).map(|(profiles, _)| profiles)
}

pub fn ingest_traces_with_report(
    path: &Path,
) -> Result<(Vec<DeviceProfile>, Vec<CoverageReport>), EnvError> {
    let records = read_trace_records(path)?;
    let mut by_device: BTreeMap<String, Vec<&TraceRecord>> = BTreeMap::new();
    for record in &records {
        by_device.entry(record.device_type.clone()).or_default().push(record);
    }

    let mut profiles = Vec::new();
    let mut reports = Vec::new();
    for (device, records) in by_device {
        let (profile, report) = build_profile(&device, &records)?;
        profiles.push(profile);
        reports.push(report);
    }
    Ok((profiles, reports))
}

fn build_profile(
    device: &str,
    records: &[&TraceRecord],
) -> Result<(DeviceProfile, CoverageReport), EnvError> {
    const R: usize = 6;
    const F: usize = 5;

    let mut exec_samples: Vec<Vec<[Vec<f64>; 2]>> = vec![vec![[Vec::new(), Vec::new()]; F]; R];
    let mut smooth_samples: Vec<Vec<f64>> = vec![Vec::new(); F];
    let mut success_counts = vec![(0u64, 0u64); R];
    let mut energy: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    for rec in records {
        exec_samples[rec.resolution][rec.fps][rec.gpu as usize].push(rec.execution_time_ms);
        smooth_samples[rec.fps].push(rec.smoothness_px);
        let (ok, total) = &mut success_counts[rec.resolution];
        *ok += rec.success as u64;
        *total += 1;
        energy[rec.gpu as usize].push(rec.energy_w);
    }

    let has_gpu_records = !energy[1].is_empty();
    let mut filled = Vec::new();
    let mut recorded_cells = 0;

    // Recorded cells become gaussians; gaps fill from the recorded fps
    // neighbors, never from other filled cells.
    let mut exec_time_table = vec![vec![[Gauss { mean: 0.0, std: 0.0 }; 2]; F]; R];
    let gpu_planes: &[bool] = if has_gpu_records {
        &[false, true]
    } else {
        &[false]
    };
    for r in 0..R {
        for &gpu in gpu_planes {
            let recorded: Vec<Option<Gauss>> = (0..F)
                .map(|f| gauss_of(&exec_samples[r][f][gpu as usize]))
                .collect();
            for f in 0..F {
                if let Some(g) = recorded[f] {
                    exec_time_table[r][f][gpu as usize] = g;
                    recorded_cells += 1;
                    continue;
                }
                let neighbors: Vec<Gauss> = [f.checked_sub(1), Some(f + 1)]
                    .into_iter()
                    .flatten()
                    .filter(|&n| n < F)
                    .filter_map(|n| recorded[n])
                    .collect();
                if neighbors.is_empty() {
                    return Err(EnvError::UnfillableGap {
                        device: device.to_string(),
                        resolution: RESOLUTION_LABELS[r].to_string(),
                        fps: crate::labels::FPS_LADDER[f],
                        gpu,
                    });
                }
                exec_time_table[r][f][gpu as usize] = Gauss {
                    mean: neighbors.iter().map(|g| g.mean).sum::<f64>() / neighbors.len() as f64,
                    std: neighbors.iter().map(|g| g.std).sum::<f64>() / neighbors.len() as f64,
                };
                filled.push((
                    RESOLUTION_LABELS[r].to_string(),
                    FPS_LABELS[f].to_string(),
                    gpu,
                ));
            }
        }
    }
    if !has_gpu_records {
        // A device that never reported GPU usage keeps its measured timings
        // for both switch positions.
        log::warn!("device `{device}`: no gpu=1 rows, mirroring the gpu=0 timings");
        for r in 0..R {
            for f in 0..F {
                exec_time_table[r][f][1] = exec_time_table[r][f][0];
            }
        }
    }

    let success_rate: Vec<f64> = success_counts
        .iter()
        .enumerate()
        .map(|(r, &(ok, total))| {
            if total == 0 {
                Err(EnvError::IncompleteDevice {
                    device: device.to_string(),
                    message: format!("no rows at resolution {}", RESOLUTION_LABELS[r]),
                })
            } else {
                Ok(ok as f64 / total as f64)
            }
        })
        .collect::<Result<_, _>>()?;

    let smooth_recorded: Vec<Option<Gauss>> =
        (0..F).map(|f| gauss_of(&smooth_samples[f])).collect();
    let smoothness_table: Vec<Gauss> = (0..F)
        .map(|f| {
            if let Some(g) = smooth_recorded[f] {
                return Ok(g);
            }
            let neighbors: Vec<Gauss> = [f.checked_sub(1), Some(f + 1)]
                .into_iter()
                .flatten()
                .filter(|&n| n < F)
                .filter_map(|n| smooth_recorded[n])
                .collect();
            if neighbors.is_empty() {
                return Err(EnvError::IncompleteDevice {
                    device: device.to_string(),
                    message: format!("smoothness has no data near fps {}", FPS_LABELS[f]),
                });
            }
            Ok(Gauss {
                mean: neighbors.iter().map(|g| g.mean).sum::<f64>() / neighbors.len() as f64,
                std: neighbors.iter().map(|g| g.std).sum::<f64>() / neighbors.len() as f64,
            })
        })
        .collect::<Result<_, _>>()?;

    let base_power;
    let mut gpu_power_delta = DEFAULT_GPU_POWER_DELTA;
    match (gauss_of(&energy[0]), gauss_of(&energy[1])) {
        (Some(off), Some(on)) => {
            base_power = off.mean;
            gpu_power_delta = (on.mean - off.mean).max(0.0);
        }
        (Some(off), None) => base_power = off.mean,
        (None, Some(on)) => {
            log::warn!("device `{device}`: every row has gpu=1, inferring base power");
            base_power = (on.mean - DEFAULT_GPU_POWER_DELTA).max(0.0);
        }
        (None, None) => unreachable!("devices without records are never grouped"),
    }

    let profile = DeviceProfile {
        name: device.to_string(),
        base_power,
        gpu_power_delta,
        comm_power_delta: DEFAULT_COMM_POWER_DELTA,
        exec_time_table,
        success_rate,
        smoothness_table,
    };
    profile.validate()?;
    let report = CoverageReport {
        device: device.to_string(),
        recorded_cells,
        total_cells: R * F * 2,
        filled,
    };
    Ok((profile, report))
}

fn gauss_of(samples: &[f64]) -> Option<Gauss> {
    if samples.is_empty() {
        return None;
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Some(Gauss {
        mean,
        std: var.sqrt(),
    })
}

fn malformed(path: &str, line: u64, message: String) -> EnvError {
    EnvError::MalformedTrace {
        path: path.to_string(),
        line,
        message,
    }
}

fn map_open_error(path: &str, error: csv::Error) -> EnvError {
    match error.into_kind() {
        csv::ErrorKind::Io(source) => EnvError::TraceIo {
            path: path.to_string(),
            source,
        },
        other => EnvError::MalformedTrace {
            path: path.to_string(),
            line: 0,
            message: format!("{other:?}"),
        },
    }
}
