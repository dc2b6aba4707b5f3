//! Shared label vocabulary for the pipeline's modalities, actions, and bins.
//! Agents and the environment both index into these tables, so ordering here
//! is load-bearing: ladders run low to high, booleans run (False, True), and
//! ordinal metric bins run from the listed best bin to the worst.

/// Frame-rate ladder, frames per second.
pub const FPS_LADDER: [u32; 5] = [12, 16, 20, 26, 30];
pub const FPS_LABELS: [&str; 5] = ["12", "16", "20", "26", "30"];

/// Resolution ladder.
pub const RESOLUTION_LABELS: [&str; 6] = ["120p", "180p", "240p", "360p", "480p", "720p"];

/// Request / change direction labels shared by the producer's satisfaction
/// modalities and its controls.
pub const CHANGE_LABELS: [&str; 3] = ["Increase", "Stay", "Decrease"];
pub const CHANGE_INCREASE: usize = 0;
pub const CHANGE_STAY: usize = 1;
pub const CHANGE_DECREASE: usize = 2;

/// Boolean modalities; the preferred value True sits last.
pub const BOOL_LABELS: [&str; 2] = ["False", "True"];
pub const BOOL_FALSE: usize = 0;
pub const BOOL_TRUE: usize = 1;

/// Execution-time bins over (0,15], (15,30], (30,45], (45,60], (60,inf) ms.
pub const EXEC_TIME_LABELS: [&str; 5] = ["LOW", "MID-LOW", "MID", "MID-HIGH", "HIGH"];
pub const EXEC_TIME_EDGES_MS: [f64; 4] = [15.0, 30.0, 45.0, 60.0];

/// Power-consumption bins: LOW < 7 W, MID 7-8 W, HIGH > 8 W.
pub const CONSUMPTION_LABELS: [&str; 3] = ["LOW", "MID", "HIGH"];
pub const CONSUMPTION_MID: usize = 1;

/// Smoothness bins over (0,25], (25,50], (50,75], (75,100], (100,inf) px.
pub const SMOOTHNESS_LABELS: [&str; 5] = ["SHORT", "MID-SHORT", "MID", "MID-LONG", "LONG"];
pub const SMOOTHNESS_EDGES_PX: [f64; 4] = [25.0, 50.0, 75.0, 100.0];
pub const SMOOTHNESS_MID: usize = 2;

/// GPU switch action labels.
pub const SWITCH_GPU_LABELS: [&str; 3] = ["Switch on", "Switch off", "Stay"];
pub const SWITCH_ON: usize = 0;
pub const SWITCH_OFF: usize = 1;
pub const SWITCH_STAY: usize = 2;

/// Communication toggle action labels.
pub const TOGGLE_COMM_LABELS: [&str; 3] = ["Enable", "Disable", "Stay"];
pub const TOGGLE_ENABLE: usize = 0;
pub const TOGGLE_DISABLE: usize = 1;
pub const TOGGLE_STAY: usize = 2;

/// One step up an ordinal scale of `card` values, saturating at the top.
pub fn step_up(value: usize, card: usize) -> usize {
    (value + 1).min(card - 1)
}

/// One step down an ordinal scale, saturating at the bottom.
pub fn step_down(value: usize) -> usize {
    value.saturating_sub(1)
}

/// What an action does to a boolean channel, relative to its current value.
/// Restating the current value counts as `Unchanged`; only actual flips are
/// effective activations or deactivations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToggleStatus {
    Activated,
    Deactivated,
    Unchanged,
}

/// Effective status of a `Toggle_comm` action against the current channel state.
pub fn toggle_status(action: usize, current_on: bool) -> ToggleStatus {
    match action {
        TOGGLE_ENABLE if !current_on => ToggleStatus::Activated,
        TOGGLE_DISABLE if current_on => ToggleStatus::Deactivated,
        _ => ToggleStatus::Unchanged,
    }
}

/// Effective status of a `Switch_GPU` action against the current GPU state.
pub fn switch_status(action: usize, current_on: bool) -> ToggleStatus {
    match action {
        SWITCH_ON if !current_on => ToggleStatus::Activated,
        SWITCH_OFF if current_on => ToggleStatus::Deactivated,
        _ => ToggleStatus::Unchanged,
    }
}

/// Joint effect of two channel statuses on a consumption scale: any effective
/// activation not offset by a deactivation steps up, any deactivation not
/// offset steps down, and an activation paired with a deactivation (or no
/// effective change at all) holds the value.
pub fn consumption_step(
    current: usize,
    card: usize,
    first: ToggleStatus,
    second: ToggleStatus,
) -> usize {
    use ToggleStatus::*;
    match (first, second) {
        (Activated, Activated) | (Activated, Unchanged) | (Unchanged, Activated) => {
            step_up(current, card)
        }
        (Activated, Deactivated) | (Deactivated, Activated) => current,
        (Deactivated, _) | (_, Deactivated) => step_down(current),
        (Unchanged, Unchanged) => current,
    }
}
