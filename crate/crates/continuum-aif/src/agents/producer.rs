//! Producer agent: serves the camera feed and answers for the downstream
//! services' change requests (WF from the worker, CF and CR from the
//! consumer) while steering the FPS and resolution ladders.

use crate::efe::PreferenceModel;
use crate::error::ModelError;
use crate::labels::{
    step_down, step_up, CHANGE_DECREASE, CHANGE_INCREASE, CHANGE_LABELS, CHANGE_STAY, FPS_LABELS,
    RESOLUTION_LABELS,
};
use crate::space::{ControlSpace, FactorSpace};
use crate::transition::{FactorWiring, TransitionFactorModel};

use super::{uniform_prior, AgentSpec, SloidPredicate, SloidSpec, TransitionModel};

/// Next value of a request-satisfaction modality (WF, CF, or CR) given the
/// ladder position it watches and the change action taken on that ladder.
///
/// Complying with a request marks it satisfied: moving the ladder against the
/// current request direction lands on Stay, moving it while the request is
/// Stay or opposite flips the request toward undoing the move. Acting Stay,
/// or pushing against a saturated ladder end, leaves the request untouched.
fn satisfaction_rule(request: usize, ladder: usize, ladder_card: usize, action: usize) -> usize {
    match action {
        CHANGE_STAY => request,
        CHANGE_INCREASE => {
            if ladder == ladder_card - 1 {
                request
            } else if request == CHANGE_INCREASE {
                CHANGE_STAY
            } else {
                CHANGE_DECREASE
            }
        }
        _ => {
            if ladder == 0 {
                request
            } else if request == CHANGE_DECREASE {
                CHANGE_STAY
            } else {
                CHANGE_INCREASE
            }
        }
    }
}

/// Deterministic ladder walk with saturation at both ends.
fn ladder_rule(position: usize, card: usize, action: usize) -> usize {
    match action {
        CHANGE_INCREASE => step_up(position, card),
        CHANGE_STAY => position,
        _ => step_down(position),
    }
}

pub fn build_producer() -> Result<AgentSpec, ModelError> {
    let factors = FactorSpace::new(vec![
        ("WF", CHANGE_LABELS.to_vec()),
        ("CF", CHANGE_LABELS.to_vec()),
        ("CR", CHANGE_LABELS.to_vec()),
        ("FPS", FPS_LABELS.to_vec()),
        ("Resolution", RESOLUTION_LABELS.to_vec()),
    ])?;
    let controls = ControlSpace::new(vec![
        ("Change_FPS", CHANGE_LABELS.to_vec()),
        ("Change_resolution", CHANGE_LABELS.to_vec()),
    ])?;

    let fps_card = FPS_LABELS.len();
    let res_card = RESOLUTION_LABELS.len();

    let wf = TransitionFactorModel::from_rule(
        FactorWiring::resolve("WF", &["WF", "FPS"], &["Change_FPS"], &factors, &controls)?,
        |s, c| satisfaction_rule(s[0], s[1], fps_card, c[0]),
    )?;
    let cf = TransitionFactorModel::from_rule(
        FactorWiring::resolve("CF", &["CF", "FPS"], &["Change_FPS"], &factors, &controls)?,
        |s, c| satisfaction_rule(s[0], s[1], fps_card, c[0]),
    )?;
    let cr = TransitionFactorModel::from_rule(
        FactorWiring::resolve(
            "CR",
            &["CR", "Resolution"],
            &["Change_resolution"],
            &factors,
            &controls,
        )?,
        |s, c| satisfaction_rule(s[0], s[1], res_card, c[0]),
    )?;
    let fps = TransitionFactorModel::from_rule(
        FactorWiring::resolve("FPS", &["FPS"], &["Change_FPS"], &factors, &controls)?,
        |s, c| ladder_rule(s[0], fps_card, c[0]),
    )?;
    let resolution = TransitionFactorModel::from_rule(
        FactorWiring::resolve(
            "Resolution",
            &["Resolution"],
            &["Change_resolution"],
            &factors,
            &controls,
        )?,
        |s, c| ladder_rule(s[0], res_card, c[0]),
    )?;

    let preferences = PreferenceModel::new(
        &factors,
        vec![
            ("WF", vec![0.25, 1.5, 0.25]),
            ("CF", vec![0.5, 3.0, 0.5]),
            ("CR", vec![0.5, 3.0, 0.5]),
            ("FPS", vec![0.0; fps_card]),
            ("Resolution", vec![0.0; res_card]),
        ],
    )?;
    let prior = uniform_prior(&factors)?;

    let sloids = ["WF", "CF", "CR"]
        .into_iter()
        .map(|name| SloidSpec {
            name: name.to_string(),
            modality: name.to_string(),
            predicate: SloidPredicate::Equals {
                label: CHANGE_STAY,
            },
        })
        .collect();

    Ok(AgentSpec {
        name: "producer".to_string(),
        factors,
        controls,
        transition: TransitionModel::Expert(vec![wf, cf, cr, fps, resolution]),
        preferences,
        prior,
        sloids,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labels::CHANGE_LABELS;

    fn model<'a>(spec: &'a AgentSpec, factor: &str) -> &'a TransitionFactorModel {
        let TransitionModel::Expert(models) = &spec.transition else {
            panic!("expert expected");
        };
        let index = spec.factors.index_of(factor).unwrap();
        &models[index]
    }

    #[test]
    fn complying_with_a_resolution_decrease_request_flips_it_to_increase() {
        let spec = build_producer().unwrap();
        let cr = model(&spec, "CR");
        // CR=Stay, Resolution=480p, Change_resolution=Decrease
        let col = cr.column(&[CHANGE_STAY, 4], &[CHANGE_DECREASE]);
        assert_eq!(col.probs()[CHANGE_INCREASE], 1.0);
    }

    #[test]
    fn fps_ladder_saturates_at_the_top() {
        let spec = build_producer().unwrap();
        let fps = model(&spec, "FPS");
        assert_eq!(fps.column(&[4], &[CHANGE_INCREASE]).prob(4), 1.0);
        assert_eq!(fps.column(&[2], &[CHANGE_INCREASE]).prob(3), 1.0);
        assert_eq!(fps.column(&[0], &[CHANGE_DECREASE]).prob(0), 1.0);
    }

    #[test]
    fn stay_fixes_every_satisfaction_state() {
        let spec = build_producer().unwrap();
        for (name, ladder_card) in [("WF", 5), ("CF", 5), ("CR", 6)] {
            let m = model(&spec, name);
            for request in 0..CHANGE_LABELS.len() {
                for ladder in 0..ladder_card {
                    let col = m.column(&[request, ladder], &[CHANGE_STAY]);
                    assert_eq!(col.prob(request), 1.0, "{name} {request} {ladder}");
                }
            }
        }
    }

    #[test]
    fn boundary_pushes_leave_requests_untouched() {
        let spec = build_producer().unwrap();
        let wf = model(&spec, "WF");
        for request in 0..3 {
            assert_eq!(wf.column(&[request, 4], &[CHANGE_INCREASE]).prob(request), 1.0);
            assert_eq!(wf.column(&[request, 0], &[CHANGE_DECREASE]).prob(request), 1.0);
        }
    }

    #[test]
    fn satisfaction_becomes_stay_when_the_move_matches_the_request() {
        let spec = build_producer().unwrap();
        let wf = model(&spec, "WF");
        // WF=Decrease and the producer decreases: request satisfied
        assert_eq!(
            wf.column(&[CHANGE_DECREASE, 2], &[CHANGE_DECREASE]).prob(CHANGE_STAY),
            1.0
        );
        // WF=Increase and the producer increases: request satisfied
        assert_eq!(
            wf.column(&[CHANGE_INCREASE, 2], &[CHANGE_INCREASE]).prob(CHANGE_STAY),
            1.0
        );
        // WF=Stay and the producer increases anyway: worker pushes back
        assert_eq!(
            wf.column(&[CHANGE_STAY, 2], &[CHANGE_INCREASE]).prob(CHANGE_DECREASE),
            1.0
        );
    }

    #[test]
    fn sloids_accept_only_stay() {
        let spec = build_producer().unwrap();
        // WF=Stay, CF=Stay, CR=Increase, FPS=20, Resolution=480p
        let flags = spec
            .evaluate_sloids_labels(&["Stay", "Stay", "Increase", "20", "480p"])
            .unwrap();
        assert_eq!(flags["WF"], true);
        assert_eq!(flags["CF"], true);
        assert_eq!(flags["CR"], false);
    }
}
