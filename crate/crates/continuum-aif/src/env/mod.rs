//! Pipeline environment: shared stream state plus synthetic or trace-driven
//! measurement backends.

pub mod pipeline;
pub mod profile;
pub mod trace;

pub use pipeline::{
    PipelineEnv, RequestBundle, RequestMode, ServiceRole, StepObservations, VideoConfig,
};
pub use profile::{builtin_profiles, DeviceProfile, Gauss, ProfileDoc};
pub use trace::{
    ingest_traces, ingest_traces_with_report, read_trace_records, CoverageReport, TraceRecord,
    TRACE_COLUMNS,
};

use crate::labels::{EXEC_TIME_EDGES_MS, SMOOTHNESS_EDGES_PX};

/// Number of edges at or below `value`; edges must be ascending.
fn edge_bin(value: f64, edges: &[f64]) -> usize {
    edges.iter().filter(|&&e| value >= e).count()
}

/// Five bins over milliseconds with edges at 15/30/45/60, lower-inclusive.
pub fn exec_time_bin(ms: f64) -> usize {
    edge_bin(ms, &EXEC_TIME_EDGES_MS)
}

/// Five bins over pixels of jitter with edges at 25/50/75/100.
pub fn smoothness_bin(px: f64) -> usize {
    edge_bin(px, &SMOOTHNESS_EDGES_PX)
}

/// LOW below 7 W, MID through 8 W, HIGH above.
pub fn consumption_bin(watts: f64) -> usize {
    if watts < 7.0 {
        0
    } else if watts <= 8.0 {
        1
    } else {
        2
    }
}
