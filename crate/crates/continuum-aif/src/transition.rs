//! Per-factor transition models: conditional probability tables whose columns
//! are indexed by a DBN parent set (state parents, then control parents), and
//! Dirichlet count tables of the same shape for learning.

use serde::{Deserialize, Serialize};

use crate::belief::BeliefState;
use crate::categorical::Categorical;
use crate::error::ModelError;
use crate::space::{ControlSpace, FactorSpace, JointAction};

/// The resolved shape of one factor's CPT: which belief marginals and which
/// joint-action slots select a column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorWiring {
    pub child: String,
    pub child_index: usize,
    pub child_cardinality: usize,
    pub state_parents: Vec<String>,
    pub state_parent_indices: Vec<usize>,
    pub state_parent_cards: Vec<usize>,
    pub control_parents: Vec<String>,
    pub control_parent_indices: Vec<usize>,
    pub control_parent_cards: Vec<usize>,
}

impl FactorWiring {
    pub fn resolve(
        child: &str,
        state_parents: &[&str],
        control_parents: &[&str],
        factors: &FactorSpace,
        controls: &ControlSpace,
    ) -> Result<Self, ModelError> {
        let child_index = factors.index_of(child)?;
        let mut state_parent_indices = Vec::new();
        for p in state_parents {
            state_parent_indices.push(factors.index_of(p)?);
        }
        let mut control_parent_indices = Vec::new();
        for c in control_parents {
            control_parent_indices.push(controls.index_of(c)?);
        }
        Ok(Self {
            child: child.to_string(),
            child_index,
            child_cardinality: factors.cardinality(child_index),
            state_parents: state_parents.iter().map(|s| s.to_string()).collect(),
            state_parent_cards: state_parent_indices
                .iter()
                .map(|&i| factors.cardinality(i))
                .collect(),
            state_parent_indices,
            control_parents: control_parents.iter().map(|s| s.to_string()).collect(),
            control_parent_cards: control_parent_indices
                .iter()
                .map(|&i| controls.cardinality(i))
                .collect(),
            control_parent_indices,
        })
    }

    /// Total number of CPT columns.
    pub fn column_count(&self) -> usize {
        self.state_parent_cards.iter().product::<usize>()
            * self.control_parent_cards.iter().product::<usize>()
    }

    /// Mixed-radix column index; state parents first, each most significant
    /// in declaration order, control parents after.
    pub fn column_index(&self, parent_states: &[usize], parent_controls: &[usize]) -> usize {
        debug_assert_eq!(parent_states.len(), self.state_parent_cards.len());
        debug_assert_eq!(parent_controls.len(), self.control_parent_cards.len());
        let mut index = 0;
        for (&value, &card) in parent_states.iter().zip(&self.state_parent_cards) {
            debug_assert!(value < card);
            index = index * card + value;
        }
        for (&value, &card) in parent_controls.iter().zip(&self.control_parent_cards) {
            debug_assert!(value < card);
            index = index * card + value;
        }
        index
    }

    /// Control-parent choices extracted from a full joint action.
    pub fn controls_of(&self, action: &JointAction) -> Vec<usize> {
        self.control_parent_indices
            .iter()
            .map(|&i| action[i])
            .collect()
    }

    /// Inverse of [`Self::column_index`]: (parent states, parent controls).
    pub fn parents_at(&self, mut column: usize) -> (Vec<usize>, Vec<usize>) {
        let mut controls = vec![0; self.control_parent_cards.len()];
        for (slot, &card) in controls.iter_mut().zip(&self.control_parent_cards).rev() {
            *slot = column % card;
            column /= card;
        }
        let mut states = vec![0; self.state_parent_cards.len()];
        for (slot, &card) in states.iter_mut().zip(&self.state_parent_cards).rev() {
            *slot = column % card;
            column /= card;
        }
        (states, controls)
    }
}

/// One factor's conditional probability table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionFactorModel {
    pub wiring: FactorWiring,
    columns: Vec<Categorical>,
}

impl TransitionFactorModel {
    pub fn new(wiring: FactorWiring, columns: Vec<Categorical>) -> Result<Self, ModelError> {
        if columns.len() != wiring.column_count() {
            return Err(ModelError::InvalidFactorModel {
                factor: wiring.child.clone(),
                message: format!(
                    "expected {} columns, got {}",
                    wiring.column_count(),
                    columns.len()
                ),
            });
        }
        for (i, col) in columns.iter().enumerate() {
            if col.len() != wiring.child_cardinality {
                return Err(ModelError::InvalidFactorModel {
                    factor: wiring.child.clone(),
                    message: format!(
                        "column {} has {} entries, expected {}",
                        i,
                        col.len(),
                        wiring.child_cardinality
                    ),
                });
            }
        }
        Ok(Self { wiring, columns })
    }

    /// Builds a deterministic CPT from a rule mapping parent values to the
    /// next child value.
    pub fn from_rule(
        wiring: FactorWiring,
        rule: impl Fn(&[usize], &[usize]) -> usize,
    ) -> Result<Self, ModelError> {
        let mut columns = Vec::with_capacity(wiring.column_count());
        for column in 0..wiring.column_count() {
            let (states, controls) = wiring.parents_at(column);
            let next = rule(&states, &controls);
            columns.push(Categorical::delta(wiring.child_cardinality, next)?);
        }
        Self::new(wiring, columns)
    }

    pub fn column(&self, parent_states: &[usize], parent_controls: &[usize]) -> &Categorical {
        &self.columns[self.wiring.column_index(parent_states, parent_controls)]
    }

    pub fn columns(&self) -> &[Categorical] {
        &self.columns
    }

    /// Re-checks every column against the normalization tolerance. Columns
    /// are validated at construction; this exists for the model validator and
    /// for tables deserialized from JSON.
    pub fn validate(&self) -> Result<(), ModelError> {
        for (i, col) in self.columns.iter().enumerate() {
            let sum: f64 = col.probs().iter().sum();
            if (sum - 1.0).abs() > crate::categorical::PROB_EPS {
                return Err(ModelError::UnnormalizedColumn {
                    factor: self.wiring.child.clone(),
                    column: i,
                    sum,
                });
            }
        }
        Ok(())
    }
}

/// Dirichlet count table over the same column layout as a CPT.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletCounts {
    pub wiring: FactorWiring,
    counts: Vec<Vec<f64>>,
}

impl DirichletCounts {
    /// Every cell set to `prior`, which must be positive.
    pub fn uniform_prior(wiring: FactorWiring, prior: f64) -> Result<Self, ModelError> {
        if !(prior > 0.0) {
            return Err(ModelError::NonPositivePriorCount { count: prior });
        }
        let counts = vec![vec![prior; wiring.child_cardinality]; wiring.column_count()];
        Ok(Self { wiring, counts })
    }

    pub fn counts(&self) -> &[Vec<f64>] {
        &self.counts
    }

    pub fn column_counts(&self, parent_states: &[usize], parent_controls: &[usize]) -> &[f64] {
        &self.counts[self.wiring.column_index(parent_states, parent_controls)]
    }

    /// Adds `lr * Q(child') * prod_j Q(parent_j)` to the columns selected by
    /// the taken action, accumulating evidence for the observed transition.
    /// With delta beliefs this increments a single cell by `lr`.
    pub fn accumulate(
        &mut self,
        previous: &BeliefState,
        action: &JointAction,
        next: &BeliefState,
        learning_rate: f64,
    ) -> Result<(), ModelError> {
        if !(learning_rate > 0.0) {
            return Err(ModelError::NonPositiveLearningRate {
                rate: learning_rate,
            });
        }
        let child_marginal = next.marginal(self.wiring.child_index);
        if child_marginal.len() != self.wiring.child_cardinality {
            return Err(ModelError::MarginalCardinality {
                factor: self.wiring.child.clone(),
                expected: self.wiring.child_cardinality,
                got: child_marginal.len(),
            });
        }
        let controls = self.wiring.controls_of(action);
        let parent_marginals: Vec<&Categorical> = self
            .wiring
            .state_parent_indices
            .iter()
            .map(|&i| previous.marginal(i))
            .collect();
        for (m, (&card, parent)) in self
            .wiring
            .state_parent_cards
            .iter()
            .zip(&parent_marginals)
            .enumerate()
        {
            if parent.len() != card {
                return Err(ModelError::MarginalCardinality {
                    factor: self.wiring.state_parents[m].clone(),
                    expected: card,
                    got: parent.len(),
                });
            }
        }
        let supports: Vec<Vec<(usize, f64)>> = parent_marginals
            .iter()
            .map(|m| m.support().collect())
            .collect();
        let mut config = vec![0usize; supports.len()];
        visit_support(&supports, &mut config, 1.0, &mut |states, weight| {
            let column = self.wiring.column_index(states, &controls);
            let cells = &mut self.counts[column];
            for (c, cell) in cells.iter_mut().enumerate() {
                *cell += learning_rate * weight * child_marginal.prob(c);
            }
        });
        Ok(())
    }

    /// Column-normalizes the counts into a CPT.
    pub fn normalize(&self) -> Result<TransitionFactorModel, ModelError> {
        let mut columns = Vec::with_capacity(self.counts.len());
        for (i, cells) in self.counts.iter().enumerate() {
            let total: f64 = cells.iter().sum();
            if !(total > 0.0) {
                return Err(ModelError::ZeroCountColumn {
                    factor: self.wiring.child.clone(),
                    column: i,
                });
            }
            let probs: Vec<f64> = cells.iter().map(|&c| c / total).collect();
            columns.push(Categorical::from_probs(probs)?);
        }
        TransitionFactorModel::new(self.wiring.clone(), columns)
    }
}

/// Depth-first walk over the cross product of per-parent supports,
/// accumulating the product of the visited probabilities.
pub(crate) fn visit_support(
    supports: &[Vec<(usize, f64)>],
    config: &mut Vec<usize>,
    weight: f64,
    f: &mut impl FnMut(&[usize], f64),
) {
    visit_support_at(supports, 0, config, weight, f);
}

fn visit_support_at(
    supports: &[Vec<(usize, f64)>],
    level: usize,
    config: &mut Vec<usize>,
    weight: f64,
    f: &mut impl FnMut(&[usize], f64),
) {
    if level == supports.len() {
        f(config, weight);
        return;
    }
    for &(index, p) in &supports[level] {
        config[level] = index;
        visit_support_at(supports, level + 1, config, weight * p, f);
    }
}
