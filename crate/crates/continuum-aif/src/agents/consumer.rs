//! Consumer agent: renders the stream and tracks delivery quality.
//!
//! The consumer's only lever is its communication channel back to the
//! producer. Opening it promises a quality bump (success, smoothness, frame
//! rate, resolution) at the price of extra consumption while the channel
//! stays up.

use crate::agents::{AgentSpec, SloidPredicate, SloidSpec, TransitionModel};
use crate::categorical::Categorical;
use crate::efe::PreferenceModel;
use crate::error::ModelError;
use crate::labels::{
    step_up, toggle_status, ToggleStatus, BOOL_LABELS, BOOL_TRUE, CONSUMPTION_LABELS,
    CONSUMPTION_MID, FPS_LABELS, RESOLUTION_LABELS, SMOOTHNESS_LABELS, SMOOTHNESS_MID,
    TOGGLE_COMM_LABELS,
};
use crate::space::{ControlSpace, FactorSpace};
use crate::transition::{FactorWiring, TransitionFactorModel};

use super::uniform_prior;

/// Builds the consumer agent with its expert transition model.
pub fn build_consumer() -> Result<AgentSpec, ModelError> {
    let factors = FactorSpace::new(vec![
        ("Success", BOOL_LABELS.to_vec()),
        ("Smoothness", SMOOTHNESS_LABELS.to_vec()),
        ("C-consumption", CONSUMPTION_LABELS.to_vec()),
        ("FPS", FPS_LABELS.to_vec()),
        ("Resolution", RESOLUTION_LABELS.to_vec()),
        ("ShareInfo", BOOL_LABELS.to_vec()),
    ])
    ?;
    let controls = ControlSpace::new(vec![("Toggle_comm", TOGGLE_COMM_LABELS.to_vec())])
        ?;

    let enable = |c: &[usize]| c[0] == 0;

    // Opening the channel promises delivery recovery; otherwise success holds.
    let success = TransitionFactorModel::from_rule(
        FactorWiring::resolve("Success", &["Success"], &["Toggle_comm"], &factors, &controls)
            ?,
        |s, c| if enable(c) { BOOL_TRUE } else { s[0] },
    )
    ?;

    // Same promise for smoothness: the channel drives matching toward the
    // shortest-gap bin; otherwise the bin holds.
    let smoothness = TransitionFactorModel::from_rule(
        FactorWiring::resolve(
            "Smoothness",
            &["Smoothness"],
            &["Toggle_comm"],
            &factors,
            &controls,
        )
        ?,
        |s, c| if enable(c) { 0 } else { s[0] },
    )
    ?;

    // Consumption reacts only to actual channel flips: opening costs a step
    // up, closing earns a step down, restating the current state is free.
    let c_consumption = TransitionFactorModel::from_rule(
        FactorWiring::resolve(
            "C-consumption",
            &["C-consumption", "ShareInfo"],
            &["Toggle_comm"],
            &factors,
            &controls,
        )
        ?,
        |s, c| match toggle_status(c[0], s[1] == BOOL_TRUE) {
            ToggleStatus::Activated => step_up(s[0], CONSUMPTION_LABELS.len()),
            ToggleStatus::Deactivated => s[0].saturating_sub(1),
            ToggleStatus::Unchanged => s[0],
        },
    )
    ?;

    let fps = TransitionFactorModel::from_rule(
        FactorWiring::resolve("FPS", &["FPS"], &["Toggle_comm"], &factors, &controls)
            ?,
        |s, c| {
            if enable(c) {
                step_up(s[0], FPS_LABELS.len())
            } else {
                s[0]
            }
        },
    )
    ?;

    let resolution = TransitionFactorModel::from_rule(
        FactorWiring::resolve(
            "Resolution",
            &["Resolution"],
            &["Toggle_comm"],
            &factors,
            &controls,
        )
        ?,
        |s, c| {
            if enable(c) {
                step_up(s[0], RESOLUTION_LABELS.len())
            } else {
                s[0]
            }
        },
    )
    ?;

    let share_info = TransitionFactorModel::from_rule(
        FactorWiring::resolve(
            "ShareInfo",
            &["ShareInfo"],
            &["Toggle_comm"],
            &factors,
            &controls,
        )
        ?,
        |s, c| match toggle_status(c[0], s[0] == BOOL_TRUE) {
            ToggleStatus::Activated => BOOL_TRUE,
            ToggleStatus::Deactivated => 0,
            ToggleStatus::Unchanged => s[0],
        },
    )
    ?;

    let preferences = PreferenceModel::new(
        &factors,
        vec![
            ("Success", vec![0.25, 3.0]),
            ("Smoothness", vec![3.0, 2.5, 2.0, 0.5, 0.1]),
            ("C-consumption", vec![3.0, 2.5, 0.5]),
            ("FPS", vec![0.0; FPS_LABELS.len()]),
            ("Resolution", vec![0.0; RESOLUTION_LABELS.len()]),
            ("ShareInfo", vec![0.0; BOOL_LABELS.len()]),
        ],
    )
    ?;

    let prior: Vec<Categorical> = uniform_prior(&factors)?;

    let sloids = vec![
        SloidSpec {
            name: "Success".into(),
            modality: "Success".into(),
            predicate: SloidPredicate::Equals { label: BOOL_TRUE },
        },
        SloidSpec {
            name: "Smoothness".into(),
            modality: "Smoothness".into(),
            predicate: SloidPredicate::AtMost {
                label: SMOOTHNESS_MID,
            },
        },
        SloidSpec {
            name: "C-consumption".into(),
            modality: "C-consumption".into(),
            predicate: SloidPredicate::AtMost {
                label: CONSUMPTION_MID,
            },
        },
    ];

    Ok(AgentSpec {
        name: "consumer".into(),
        factors,
        controls,
        transition: TransitionModel::Expert(vec![
            success,
            smoothness,
            c_consumption,
            fps,
            resolution,
            share_info,
        ]),
        preferences,
        prior,
        sloids,
    })
}
