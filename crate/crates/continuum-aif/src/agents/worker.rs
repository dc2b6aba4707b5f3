//! Worker agent: runs the inference job on the video feed, switching its GPU
//! and its upstream communication channel while answering for latency and
//! power-consumption objectives.
//!
//! All modalities moved by `Toggle_comm` assume the producer grants the
//! request: enabling communication is modeled as latency becoming True and
//! FPS stepping down on the spot.

use crate::efe::PreferenceModel;
use crate::error::ModelError;
use crate::labels::{
    consumption_step, step_down, step_up, switch_status, toggle_status, ToggleStatus, BOOL_FALSE,
    BOOL_LABELS, BOOL_TRUE, CONSUMPTION_LABELS, CONSUMPTION_MID, EXEC_TIME_LABELS, FPS_LABELS,
    SWITCH_GPU_LABELS, TOGGLE_COMM_LABELS, TOGGLE_ENABLE,
};
use crate::space::{ControlSpace, FactorSpace};
use crate::transition::{FactorWiring, TransitionFactorModel};

use super::{uniform_prior, AgentSpec, SloidPredicate, SloidSpec, TransitionModel};

pub fn build_worker() -> Result<AgentSpec, ModelError> {
    let factors = FactorSpace::new(vec![
        ("Latency", BOOL_LABELS.to_vec()),
        ("ExecTime", EXEC_TIME_LABELS.to_vec()),
        ("FPS", FPS_LABELS.to_vec()),
        ("W-consumption", CONSUMPTION_LABELS.to_vec()),
        ("ShareInfo", BOOL_LABELS.to_vec()),
        ("GPU", BOOL_LABELS.to_vec()),
    ])?;
    let controls = ControlSpace::new(vec![
        ("Switch_GPU", SWITCH_GPU_LABELS.to_vec()),
        ("Toggle_comm", TOGGLE_COMM_LABELS.to_vec()),
    ])?;

    let exec_card = EXEC_TIME_LABELS.len();
    let cons_card = CONSUMPTION_LABELS.len();

    // Enabling the channel is assumed to fix latency; anything else persists.
    let latency = TransitionFactorModel::from_rule(
        FactorWiring::resolve("Latency", &["Latency"], &["Toggle_comm"], &factors, &controls)?,
        |s, c| if c[0] == TOGGLE_ENABLE { BOOL_TRUE } else { s[0] },
    )?;

    // Execution time steps with effective GPU flips only.
    let exec_time = TransitionFactorModel::from_rule(
        FactorWiring::resolve(
            "ExecTime",
            &["ExecTime", "GPU"],
            &["Switch_GPU"],
            &factors,
            &controls,
        )?,
        |s, c| match switch_status(c[0], s[1] == BOOL_TRUE) {
            ToggleStatus::Activated => step_down(s[0]),
            ToggleStatus::Deactivated => step_up(s[0], exec_card),
            ToggleStatus::Unchanged => s[0],
        },
    )?;

    // A granted communication request lowers the frame rate one ladder step.
    let fps = TransitionFactorModel::from_rule(
        FactorWiring::resolve("FPS", &["FPS"], &["Toggle_comm"], &factors, &controls)?,
        |s, c| if c[0] == TOGGLE_ENABLE { step_down(s[0]) } else { s[0] },
    )?;

    let w_consumption = TransitionFactorModel::from_rule(
        FactorWiring::resolve(
            "W-consumption",
            &["W-consumption", "ShareInfo", "GPU"],
            &["Toggle_comm", "Switch_GPU"],
            &factors,
            &controls,
        )?,
        |s, c| {
            let share = toggle_status(c[0], s[1] == BOOL_TRUE);
            let gpu = switch_status(c[1], s[2] == BOOL_TRUE);
            consumption_step(s[0], cons_card, share, gpu)
        },
    )?;

    let share_info = TransitionFactorModel::from_rule(
        FactorWiring::resolve(
            "ShareInfo",
            &["ShareInfo"],
            &["Toggle_comm"],
            &factors,
            &controls,
        )?,
        |s, c| match toggle_status(c[0], s[0] == BOOL_TRUE) {
            ToggleStatus::Activated => BOOL_TRUE,
            ToggleStatus::Deactivated => BOOL_FALSE,
            ToggleStatus::Unchanged => s[0],
        },
    )?;

    let gpu = TransitionFactorModel::from_rule(
        FactorWiring::resolve("GPU", &["GPU"], &["Switch_GPU"], &factors, &controls)?,
        |s, c| match switch_status(c[0], s[0] == BOOL_TRUE) {
            ToggleStatus::Activated => BOOL_TRUE,
            ToggleStatus::Deactivated => BOOL_FALSE,
            ToggleStatus::Unchanged => s[0],
        },
    )?;

    let preferences = PreferenceModel::new(
        &factors,
        vec![
            ("Latency", vec![0.1, 3.0]),
            ("ExecTime", vec![3.0, 2.5, 2.0, 0.25, 0.1]),
            ("FPS", vec![0.0; FPS_LABELS.len()]),
            ("W-consumption", vec![3.0, 2.5, 0.5]),
            ("ShareInfo", vec![0.0; 2]),
            ("GPU", vec![0.0; 2]),
        ],
    )?;
    let prior = uniform_prior(&factors)?;

    let sloids = vec![
        SloidSpec {
            name: "Latency".to_string(),
            modality: "Latency".to_string(),
            predicate: SloidPredicate::Equals { label: BOOL_TRUE },
        },
        SloidSpec {
            name: "W-consumption".to_string(),
            modality: "W-consumption".to_string(),
            predicate: SloidPredicate::AtMost {
                label: CONSUMPTION_MID,
            },
        },
    ];

    Ok(AgentSpec {
        name: "worker".to_string(),
        factors,
        controls,
        transition: TransitionModel::Expert(vec![
            latency,
            exec_time,
            fps,
            w_consumption,
            share_info,
            gpu,
        ]),
        preferences,
        prior,
        sloids,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labels::{
        BOOL_FALSE, SWITCH_OFF, SWITCH_ON, SWITCH_STAY, TOGGLE_DISABLE, TOGGLE_STAY,
    };

    fn model<'a>(spec: &'a AgentSpec, factor: &str) -> &'a TransitionFactorModel {
        let TransitionModel::Expert(models) = &spec.transition else {
            panic!("expert expected");
        };
        &models[spec.factors.index_of(factor).unwrap()]
    }

    #[test]
    fn switching_the_gpu_on_drops_execution_time_one_bin() {
        let spec = build_worker().unwrap();
        let exec = model(&spec, "ExecTime");
        // ExecTime=MID, GPU=False, Switch on
        assert_eq!(exec.column(&[2, BOOL_FALSE], &[SWITCH_ON]).prob(1), 1.0);
        // already on: no effect
        assert_eq!(exec.column(&[2, BOOL_TRUE], &[SWITCH_ON]).prob(2), 1.0);
        // switching off from on raises it, saturating at HIGH
        assert_eq!(exec.column(&[4, BOOL_TRUE], &[SWITCH_OFF]).prob(4), 1.0);
        assert_eq!(exec.column(&[0, BOOL_TRUE], &[SWITCH_OFF]).prob(1), 1.0);
        assert_eq!(exec.column(&[0, BOOL_FALSE], &[SWITCH_STAY]).prob(0), 1.0);
    }

    #[test]
    fn offsetting_channel_flips_hold_consumption() {
        let spec = build_worker().unwrap();
        let cons = model(&spec, "W-consumption");
        // W-consumption=MID, ShareInfo=False (Enable activates), GPU=True
        // (Switch off deactivates): rule 4 fixed point
        let col = cons.column(&[1, BOOL_FALSE, BOOL_TRUE], &[TOGGLE_ENABLE, SWITCH_OFF]);
        assert_eq!(col.prob(1), 1.0);
        // lone activation steps up
        let col = cons.column(&[1, BOOL_FALSE, BOOL_TRUE], &[TOGGLE_ENABLE, SWITCH_STAY]);
        assert_eq!(col.prob(2), 1.0);
        // lone deactivation steps down
        let col = cons.column(&[1, BOOL_TRUE, BOOL_TRUE], &[TOGGLE_DISABLE, SWITCH_STAY]);
        assert_eq!(col.prob(0), 1.0);
        // restating both values changes nothing
        let col = cons.column(&[2, BOOL_TRUE, BOOL_TRUE], &[TOGGLE_ENABLE, SWITCH_ON]);
        assert_eq!(col.prob(2), 1.0);
    }

    #[test]
    fn share_info_sets_and_stays() {
        let spec = build_worker().unwrap();
        let share = model(&spec, "ShareInfo");
        assert_eq!(share.column(&[BOOL_FALSE], &[TOGGLE_STAY]).prob(BOOL_FALSE), 1.0);
        assert_eq!(share.column(&[BOOL_FALSE], &[TOGGLE_ENABLE]).prob(BOOL_TRUE), 1.0);
        assert_eq!(share.column(&[BOOL_TRUE], &[TOGGLE_DISABLE]).prob(BOOL_FALSE), 1.0);
        assert_eq!(share.column(&[BOOL_TRUE], &[TOGGLE_STAY]).prob(BOOL_TRUE), 1.0);
    }

    #[test]
    fn enabling_the_channel_promises_latency_and_a_lower_fps() {
        let spec = build_worker().unwrap();
        let latency = model(&spec, "Latency");
        assert_eq!(latency.column(&[BOOL_FALSE], &[TOGGLE_ENABLE]).prob(BOOL_TRUE), 1.0);
        assert_eq!(latency.column(&[BOOL_FALSE], &[TOGGLE_DISABLE]).prob(BOOL_FALSE), 1.0);
        assert_eq!(latency.column(&[BOOL_TRUE], &[TOGGLE_STAY]).prob(BOOL_TRUE), 1.0);
        let fps = model(&spec, "FPS");
        assert_eq!(fps.column(&[3], &[TOGGLE_ENABLE]).prob(2), 1.0);
        assert_eq!(fps.column(&[0], &[TOGGLE_ENABLE]).prob(0), 1.0);
        assert_eq!(fps.column(&[3], &[TOGGLE_STAY]).prob(3), 1.0);
    }

    #[test]
    fn observation_inference_is_a_delta_on_both_booleans() {
        let spec = build_worker().unwrap();
        let belief = spec
            .infer_state(&["True", "MID", "20", "LOW", "False", "False"])
            .unwrap();
        assert_eq!(belief.marginal(0).prob(BOOL_TRUE), 1.0);
        assert_eq!(belief.marginal(5).prob(BOOL_FALSE), 1.0);
        assert_eq!(belief.entropy(), 0.0);
    }

    #[test]
    fn consumption_sloid_accepts_low_and_mid_only() {
        let spec = build_worker().unwrap();
        let ok = spec
            .evaluate_sloids_labels(&["True", "LOW", "20", "MID", "False", "False"])
            .unwrap();
        assert!(ok["Latency"] && ok["W-consumption"]);
        let bad = spec
            .evaluate_sloids_labels(&["False", "LOW", "20", "HIGH", "False", "False"])
            .unwrap();
        assert!(!bad["Latency"] && !bad["W-consumption"]);
    }
}
