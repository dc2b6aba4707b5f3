//! The three service agents as self-contained generative models: state
//! factors, controls, transition tables, preferences, priors, and the
//! service-level objectives each agent answers for.

mod consumer;
mod producer;
mod worker;

pub use consumer::build_consumer;
pub use producer::build_producer;
pub use worker::build_worker;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::belief::BeliefState;
use crate::categorical::Categorical;
use crate::error::ModelError;
use crate::space::{ControlSpace, FactorSpace, JointAction};
use crate::transition::{DirichletCounts, TransitionFactorModel};

pub use crate::efe::PreferenceModel;

/// Acceptance predicate of one SLOiD over its modality's label indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SloidPredicate {
    /// Fulfilled when the observed label equals this index.
    Equals { label: usize },
    /// Fulfilled when the observed label index is at most this index
    /// (ordinal scales list the best bin first).
    AtMost { label: usize },
}

/// One declared service-level objective in disguise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SloidSpec {
    pub name: String,
    pub modality: String,
    pub predicate: SloidPredicate,
}

/// Transition knowledge: fixed expert tables, or Dirichlet counts under learning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitionModel {
    Expert(Vec<TransitionFactorModel>),
    Learning(Vec<DirichletCounts>),
}

impl TransitionModel {
    pub fn factor_count(&self) -> usize {
        match self {
            TransitionModel::Expert(m) => m.len(),
            TransitionModel::Learning(c) => c.len(),
        }
    }

    pub fn is_learning(&self) -> bool {
        matches!(self, TransitionModel::Learning(_))
    }

    /// CPTs usable by the planner: expert tables as-is, learning counts
    /// column-normalized.
    pub fn planning_models(&self) -> Result<Vec<TransitionFactorModel>, ModelError> {
        match self {
            TransitionModel::Expert(m) => Ok(m.clone()),
            TransitionModel::Learning(c) => c.iter().map(DirichletCounts::normalize).collect(),
        }
    }
}

/// A complete agent generative model plus its SLOiD declarations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSpec {
    pub name: String,
    pub factors: FactorSpace,
    pub controls: ControlSpace,
    pub transition: TransitionModel,
    pub preferences: PreferenceModel,
    /// Initial state prior, one marginal per factor.
    pub prior: Vec<Categorical>,
    pub sloids: Vec<SloidSpec>,
}

impl AgentSpec {
    /// Exact inference under the identity likelihood: the posterior over each
    /// factor is a delta on the observed label.
    pub fn infer_state(&self, observation: &[&str]) -> Result<BeliefState, ModelError> {
        let indices = self.observation_indices(observation)?;
        self.infer_from_indices(&indices)
    }

    /// As [`Self::infer_state`], from label indices in factor order.
    pub fn infer_from_indices(&self, observation: &[usize]) -> Result<BeliefState, ModelError> {
        BeliefState::delta(&self.factors, observation)
    }

    /// The do-nothing joint action: the "Stay" label of every control.
    /// `None` when some control has no such label.
    pub fn null_action(&self) -> Option<JointAction> {
        self.controls
            .controls()
            .iter()
            .map(|c| c.labels.iter().position(|l| l == "Stay"))
            .collect()
    }

    /// Looks up one observed label per factor, in factor order.
    pub fn observation_indices(&self, observation: &[&str]) -> Result<Vec<usize>, ModelError> {
        if observation.len() != self.factors.len() {
            return Err(ModelError::ObservationArity {
                expected: self.factors.len(),
                got: observation.len(),
            });
        }
        observation
            .iter()
            .enumerate()
            .map(|(i, label)| self.factors.label_index(i, label))
            .collect()
    }

    /// Evaluates every declared SLOiD against an observation given as label
    /// indices in factor order.
    pub fn evaluate_sloids(&self, observation: &[usize]) -> Result<BTreeMap<String, bool>, ModelError> {
        if observation.len() != self.factors.len() {
            return Err(ModelError::ObservationArity {
                expected: self.factors.len(),
                got: observation.len(),
            });
        }
        let mut out = BTreeMap::new();
        for sloid in &self.sloids {
            let factor = self.factors.index_of(&sloid.modality)?;
            let observed = observation[factor];
            let fulfilled = match sloid.predicate {
                SloidPredicate::Equals { label } => observed == label,
                SloidPredicate::AtMost { label } => observed <= label,
            };
            out.insert(sloid.name.clone(), fulfilled);
        }
        Ok(out)
    }

    /// As [`Self::evaluate_sloids`], from observation labels.
    pub fn evaluate_sloids_labels(
        &self,
        observation: &[&str],
    ) -> Result<BTreeMap<String, bool>, ModelError> {
        let indices = self.observation_indices(observation)?;
        self.evaluate_sloids(&indices)
    }

    /// A copy of this agent whose transition knowledge is reset to uniform
    /// Dirichlet counts of the same shape. Factors, controls, parent sets,
    /// preferences, priors, and SLOiDs are untouched.
    pub fn make_learning_variant(&self, prior_count: f64) -> Result<AgentSpec, ModelError> {
        let wirings: Vec<_> = match &self.transition {
            TransitionModel::Expert(models) => models.iter().map(|m| m.wiring.clone()).collect(),
            TransitionModel::Learning(counts) => counts.iter().map(|c| c.wiring.clone()).collect(),
        };
        let counts = wirings
            .into_iter()
            .map(|w| DirichletCounts::uniform_prior(w, prior_count))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(AgentSpec {
            transition: TransitionModel::Learning(counts),
            ..self.clone()
        })
    }

    /// Structural audit. Returns human-readable violations; empty means the
    /// spec is internally consistent.
    pub fn validate(&self) -> Vec<String> {
        let mut violations = Vec::new();
        if self.factors.is_empty() {
            violations.push("agent declares no state factors".to_string());
        }
        if self.controls.is_empty() {
            violations.push("agent declares no controls".to_string());
        }
        if self.transition.factor_count() != self.factors.len() {
            violations.push(format!(
                "transition covers {} factors but the space has {}",
                self.transition.factor_count(),
                self.factors.len()
            ));
        }
        let wirings: Vec<_> = match &self.transition {
            TransitionModel::Expert(models) => models.iter().map(|m| &m.wiring).collect(),
            TransitionModel::Learning(counts) => counts.iter().map(|c| &c.wiring).collect(),
        };
        for (position, wiring) in wirings.iter().enumerate() {
            if wiring.child_index != position {
                violations.push(format!(
                    "factor `{}`: model at position {} targets factor index {}",
                    wiring.child, position, wiring.child_index
                ));
            }
            match self.factors.index_of(&wiring.child) {
                Ok(index) => {
                    if index != wiring.child_index
                        || self.factors.cardinality(index) != wiring.child_cardinality
                    {
                        violations.push(format!(
                            "factor `{}`: wiring disagrees with the factor space",
                            wiring.child
                        ));
                    }
                }
                Err(_) => violations.push(format!("factor `{}` is not in the space", wiring.child)),
            }
            for (name, (&index, &card)) in wiring.state_parents.iter().zip(
                wiring
                    .state_parent_indices
                    .iter()
                    .zip(&wiring.state_parent_cards),
            ) {
                let fine = self.factors.index_of(name).map_or(false, |i| {
                    i == index && self.factors.cardinality(i) == card
                });
                if !fine {
                    violations.push(format!(
                        "factor `{}`: state parent `{}` disagrees with the factor space",
                        wiring.child, name
                    ));
                }
            }
            for (name, (&index, &card)) in wiring.control_parents.iter().zip(
                wiring
                    .control_parent_indices
                    .iter()
                    .zip(&wiring.control_parent_cards),
            ) {
                let fine = self.controls.index_of(name).map_or(false, |i| {
                    i == index && self.controls.cardinality(i) == card
                });
                if !fine {
                    violations.push(format!(
                        "factor `{}`: control parent `{}` disagrees with the control space",
                        wiring.child, name
                    ));
                }
            }
        }
        match &self.transition {
            TransitionModel::Expert(models) => {
                for model in models {
                    if let Err(e) = model.validate() {
                        violations.push(e.to_string());
                    }
                }
            }
            TransitionModel::Learning(counts) => {
                for c in counts {
                    for (column, cells) in c.counts().iter().enumerate() {
                        if cells.iter().any(|&x| !(x > 0.0)) {
                            violations.push(format!(
                                "factor `{}`: column {} has a non-positive count",
                                c.wiring.child, column
                            ));
                        }
                    }
                }
            }
        }
        if self.preferences.values().len() != self.factors.len() {
            violations.push(format!(
                "preferences cover {} modalities but the space has {}",
                self.preferences.values().len(),
                self.factors.len()
            ));
        } else {
            for (i, values) in self.preferences.values().iter().enumerate() {
                if values.len() != self.factors.cardinality(i) {
                    violations.push(format!(
                        "preference for `{}` has {} entries, expected {}",
                        self.factors.factor(i).name,
                        values.len(),
                        self.factors.cardinality(i)
                    ));
                }
            }
        }
        if self.prior.len() != self.factors.len() {
            violations.push(format!(
                "prior covers {} factors but the space has {}",
                self.prior.len(),
                self.factors.len()
            ));
        } else {
            for (i, marginal) in self.prior.iter().enumerate() {
                if marginal.len() != self.factors.cardinality(i) {
                    violations.push(format!(
                        "prior for `{}` has {} entries, expected {}",
                        self.factors.factor(i).name,
                        marginal.len(),
                        self.factors.cardinality(i)
                    ));
                }
            }
        }
        for sloid in &self.sloids {
            match self.factors.index_of(&sloid.modality) {
                Err(_) => violations.push(format!(
                    "SLOiD `{}` targets unknown modality `{}`",
                    sloid.name, sloid.modality
                )),
                Ok(factor) => {
                    let card = self.factors.cardinality(factor);
                    let (accepts, rejects) = match sloid.predicate {
                        SloidPredicate::Equals { label } => {
                            if label >= card {
                                violations.push(format!(
                                    "SLOiD `{}` references label index {} out of range",
                                    sloid.name, label
                                ));
                                continue;
                            }
                            (1, card - 1)
                        }
                        SloidPredicate::AtMost { label } => {
                            if label >= card {
                                violations.push(format!(
                                    "SLOiD `{}` references label index {} out of range",
                                    sloid.name, label
                                ));
                                continue;
                            }
                            (label + 1, card - 1 - label)
                        }
                    };
                    if accepts == 0 || rejects == 0 {
                        violations.push(format!(
                            "SLOiD `{}` is vacuous: it accepts {} labels and rejects {}",
                            sloid.name, accepts, rejects
                        ));
                    }
                }
            }
        }
        violations
    }

    /// Serializes the full spec for inspection and golden-file comparison.
    pub fn to_json(&self) -> Result<String, serde_json::Error> {
        serde_json::to_string_pretty(self)
    }
}

/// Uniform initial prior over every factor of a space.
pub(crate) fn uniform_prior(space: &FactorSpace) -> Result<Vec<Categorical>, ModelError> {
    space
        .factors()
        .iter()
        .map(|f| Categorical::uniform(f.labels.len()))
        .collect()
}
