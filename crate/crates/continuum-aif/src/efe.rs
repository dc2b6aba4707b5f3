//! Expected free energy scoring and action selection.
//!
//! A policy is scored by rolling the belief forward one mean-field prediction
//! per step and accumulating two terms on each predicted belief: the pragmatic
//! value (expected log-preference of the predicted observations, which under
//! an identity likelihood is the preference expectation under the predicted
//! state marginals) and the information gain (expected posterior shift, which
//! under an identity likelihood is the Shannon entropy of the predicted
//! marginals). Both are averaged over the policy length and combined as
//! efe = -pragmatic_value - info_gain, so lower is better.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::belief::BeliefState;
use crate::error::ModelError;
use crate::policy::Policy;
use crate::space::{ControlSpace, FactorSpace, JointAction};
use crate::transition::{visit_support, DirichletCounts, TransitionFactorModel};

/// Log-preference values over each modality's labels, aligned to factor order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreferenceModel {
    values: Vec<Vec<f64>>,
}

impl PreferenceModel {
    /// Builds preferences from `(modality, values)` pairs. Every factor of
    /// `space` must be covered exactly once with a finite vector of matching
    /// length; order of the pairs does not matter.
    pub fn new(space: &FactorSpace, entries: Vec<(&str, Vec<f64>)>) -> Result<Self, ModelError> {
        let mut values: Vec<Option<Vec<f64>>> = vec![None; space.len()];
        for (name, v) in entries {
            let index = space.index_of(name)?;
            if v.len() != space.cardinality(index) {
                return Err(ModelError::PreferenceCardinality {
                    modality: name.to_string(),
                    expected: space.cardinality(index),
                    got: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(ModelError::NonFinitePreference {
                    modality: name.to_string(),
                });
            }
            values[index] = Some(v);
        }
        let values = values
            .into_iter()
            .enumerate()
            .map(|(i, v)| {
                v.ok_or_else(|| ModelError::MissingPreference {
                    modality: space.factor(i).name.clone(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { values })
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn modality(&self, factor: usize) -> &[f64] {
        &self.values[factor]
    }

    /// Preference expectation summed over all modalities of a belief.
    pub fn expectation(&self, belief: &BeliefState) -> Result<f64, ModelError> {
        if belief.len() != self.values.len() {
            return Err(ModelError::BeliefArity {
                expected: self.values.len(),
                got: belief.len(),
            });
        }
        Ok(belief
            .marginals()
            .iter()
            .zip(&self.values)
            .map(|(m, v)| m.dot(v))
            .sum())
    }
}

/// Per-policy scores. `efe = -pragmatic_value - info_gain` holds exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyEvaluation {
    pub pragmatic_value: f64,
    pub info_gain: f64,
    pub efe: f64,
}

/// How the first-step action is drawn from the policy posterior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionSelection {
    /// Argmax of the marginal, ties to the lowest flat action index.
    Deterministic,
    /// A sample from the marginal, driven by the provided seed.
    Sampled,
}

/// The planner output for one decision: all policy scores plus the selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfeReport {
    pub evaluations: Vec<PolicyEvaluation>,
    pub selected_index: usize,
    pub selected_action: JointAction,
}

impl EfeReport {
    pub fn selected(&self) -> &PolicyEvaluation {
        &self.evaluations[self.selected_index]
    }
}

/// Scores one policy from `belief` under `models` and `preferences`.
///
/// When `novelty` carries the agent's Dirichlet counts, the expected
/// count-shift bonus for visiting sparsely observed columns is folded into
/// `info_gain`, keeping the efe decomposition identity intact.
pub fn expected_free_energy(
    policy: &Policy,
    belief: &BeliefState,
    models: &[TransitionFactorModel],
    preferences: &PreferenceModel,
    novelty: Option<&[DirichletCounts]>,
) -> Result<PolicyEvaluation, ModelError> {
    if policy.is_empty() {
        return Err(ModelError::EmptyPolicy);
    }
    let mut pragmatic = 0.0;
    let mut info = 0.0;
    let mut rolled = belief.clone();
    for action in &policy.steps {
        let before = rolled;
        rolled = before.predict(models, action)?;
        pragmatic += preferences.expectation(&rolled)?;
        info += rolled.entropy();
        if let Some(counts) = novelty {
            for c in counts {
                info += parameter_novelty_step(c, &before, &rolled, action);
            }
        }
    }
    let steps = policy.len() as f64;
    let pragmatic_value = pragmatic / steps;
    let info_gain = info / steps;
    Ok(PolicyEvaluation {
        pragmatic_value,
        info_gain,
        efe: -pragmatic_value - info_gain,
    })
}

/// Expected reduction in Dirichlet uncertainty for one factor and one step:
/// the predicted child marginal dotted with the count-curvature of the
/// columns the belief would visit. Zero in the large-count limit.
fn parameter_novelty_step(
    counts: &DirichletCounts,
    before: &BeliefState,
    after: &BeliefState,
    action: &JointAction,
) -> f64 {
    let wiring = &counts.wiring;
    let controls = wiring.controls_of(action);
    let child = after.marginal(wiring.child_index);
    let supports: Vec<Vec<(usize, f64)>> = wiring
        .state_parent_indices
        .iter()
        .map(|&i| before.marginal(i).support().collect())
        .collect();
    let mut novelty = 0.0;
    let mut config = vec![0usize; supports.len()];
    visit_support(&supports, &mut config, 1.0, &mut |states, weight| {
        let cells = counts.column_counts(states, &controls);
        let total: f64 = cells.iter().sum();
        for (c, &alpha) in cells.iter().enumerate() {
            novelty -= child.prob(c) * weight * (1.0 / total - 1.0 / alpha);
        }
    });
    novelty
}

/// Softmax posterior over policies, marginalized onto the first-step joint
/// action. Returns `(selected policy index, marginal over flat actions)`.
fn action_marginal(
    policies: &[Policy],
    evaluations: &[PolicyEvaluation],
    controls: &ControlSpace,
    precision: f64,
) -> Result<Vec<f64>, ModelError> {
    let max_score = evaluations
        .iter()
        .map(|e| -precision * e.efe)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut weights = Vec::with_capacity(evaluations.len());
    let mut total = 0.0;
    for e in evaluations {
        let w = (-precision * e.efe - max_score).exp();
        weights.push(w);
        total += w;
    }
    let mut marginal = vec![0.0; controls.joint_action_count()];
    for (policy, w) in policies.iter().zip(&weights) {
        let flat = controls.flat_index(policy.first_action())?;
        marginal[flat] += w / total;
    }
    Ok(marginal)
}

/// Scores within this distance of the best are treated as indifferent when
/// the null-action bias applies. Exact ties are the common case: with delta
/// beliefs and deterministic tables, policy scores are plain sums of
/// preference entries.
const TIE_TOLERANCE: f64 = 1e-9;

/// Picks the acted joint action from per-policy scores.
///
/// The policy posterior is proportional to `exp(-precision * efe)`; it is
/// marginalized onto the first-step joint action and resolved by `selection`.
///
/// `null_action`, when given, breaks top-level indifference toward inaction:
/// under deterministic selection, the first actions of all policies within
/// `TIE_TOLERANCE` of the best score compete on how many controls they leave
/// at their null label, and the stillest one is acted when that count is not
/// itself tied. Without this, score ties collapse to the lowest flat action
/// index, which systematically favors whichever action happens to be
/// enumerated first.
pub fn select_action(
    policies: &[Policy],
    evaluations: &[PolicyEvaluation],
    controls: &ControlSpace,
    precision: f64,
    selection: ActionSelection,
    seed: u64,
    null_action: Option<&JointAction>,
) -> Result<(usize, JointAction), ModelError> {
    if policies.is_empty() || evaluations.len() != policies.len() {
        return Err(ModelError::EmptyReport);
    }
    if let (ActionSelection::Deterministic, Some(null)) = (selection, null_action) {
        let best = evaluations
            .iter()
            .map(|e| e.efe)
            .fold(f64::INFINITY, f64::min);
        let stillness = |action: &JointAction| -> usize {
            action.iter().zip(null).filter(|(a, n)| a == n).count()
        };
        let mut stillest: Option<&JointAction> = None;
        let mut count_is_unique = false;
        for (p, e) in policies.iter().zip(evaluations) {
            if e.efe > best + TIE_TOLERANCE {
                continue;
            }
            let action = p.first_action();
            match stillest {
                None => {
                    stillest = Some(action);
                    count_is_unique = true;
                }
                Some(current) if action != current => {
                    let (new, old) = (stillness(action), stillness(current));
                    if new > old {
                        stillest = Some(action);
                        count_is_unique = true;
                    } else if new == old {
                        count_is_unique = false;
                    }
                }
                Some(_) => {}
            }
        }
        if let (Some(action), true) = (stillest, count_is_unique) {
            let action = action.clone();
            let selected_index = representative(policies, evaluations, &action)?;
            return Ok((selected_index, action));
        }
    }
    let marginal = action_marginal(policies, evaluations, controls, precision)?;
    let flat = match selection {
        ActionSelection::Deterministic => {
            let mut best = 0;
            for (i, &p) in marginal.iter().enumerate().skip(1) {
                if p > marginal[best] {
                    best = i;
                }
            }
            best
        }
        ActionSelection::Sampled => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let draw: f64 = rng.gen();
            let mut cumulative = 0.0;
            let mut chosen = marginal.len() - 1;
            for (i, &p) in marginal.iter().enumerate() {
                cumulative += p;
                if draw < cumulative {
                    chosen = i;
                    break;
                }
            }
            chosen
        }
    };
    let action = controls.action_at(flat);
    let selected_index = representative(policies, evaluations, &action)?;
    Ok((selected_index, action))
}

/// Among policies opening with the acted step, the best-scored one.
fn representative(
    policies: &[Policy],
    evaluations: &[PolicyEvaluation],
    action: &JointAction,
) -> Result<usize, ModelError> {
    let mut selected_index: Option<usize> = None;
    for (i, p) in policies.iter().enumerate() {
        if p.first_action() != action {
            continue;
        }
        match selected_index {
            Some(j) if evaluations[i].efe >= evaluations[j].efe => {}
            _ => selected_index = Some(i),
        }
    }
    selected_index.ok_or(ModelError::EmptyReport)
}

/// Full planning pass: scores every enumerated policy and selects an action.
#[allow(clippy::too_many_arguments)]
pub fn plan(
    policies: &[Policy],
    belief: &BeliefState,
    models: &[TransitionFactorModel],
    preferences: &PreferenceModel,
    novelty: Option<&[DirichletCounts]>,
    controls: &ControlSpace,
    precision: f64,
    selection: ActionSelection,
    seed: u64,
    null_action: Option<&JointAction>,
) -> Result<EfeReport, ModelError> {
    let evaluations = policies
        .iter()
        .map(|p| expected_free_energy(p, belief, models, preferences, novelty))
        .collect::<Result<Vec<_>, _>>()?;
    let (selected_index, selected_action) = select_action(
        policies,
        &evaluations,
        controls,
        precision,
        selection,
        seed,
        null_action,
    )?;
    Ok(EfeReport {
        evaluations,
        selected_index,
        selected_action,
    })
}
