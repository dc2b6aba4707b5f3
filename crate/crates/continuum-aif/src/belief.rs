//! Factorized belief states and one-step mean-field prediction.

use serde::{Deserialize, Serialize};

use crate::categorical::Categorical;
use crate::error::ModelError;
use crate::space::{FactorSpace, JointAction};
use crate::transition::{visit_support, TransitionFactorModel};

/// One categorical marginal per state factor. The joint belief is the product
/// of the marginals; correlations between factors are not represented.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefState {
    marginals: Vec<Categorical>,
}

impl BeliefState {
    pub fn from_marginals(marginals: Vec<Categorical>) -> Result<Self, ModelError> {
        if marginals.is_empty() {
            return Err(ModelError::EmptyDistribution);
        }
        Ok(Self { marginals })
    }

    /// Certainty about every factor: a delta on `values`.
    pub fn delta(space: &FactorSpace, values: &[usize]) -> Result<Self, ModelError> {
        if values.len() != space.len() {
            return Err(ModelError::ObservationArity {
                expected: space.len(),
                got: values.len(),
            });
        }
        let marginals = space
            .factors()
            .iter()
            .zip(values)
            .map(|(f, &v)| Categorical::delta(f.labels.len(), v))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { marginals })
    }

    pub fn uniform(space: &FactorSpace) -> Result<Self, ModelError> {
        let marginals = space
            .factors()
            .iter()
            .map(|f| Categorical::uniform(f.labels.len()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { marginals })
    }

    pub fn marginals(&self) -> &[Categorical] {
        &self.marginals
    }

    pub fn marginal(&self, factor: usize) -> &Categorical {
        &self.marginals[factor]
    }

    pub fn len(&self) -> usize {
        self.marginals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.marginals.is_empty()
    }

    /// Sum of the per-factor Shannon entropies. Equals the joint entropy of
    /// the product distribution the marginals describe.
    pub fn entropy(&self) -> f64 {
        self.marginals.iter().map(Categorical::entropy).sum()
    }

    /// Mean-field one-step prediction: each factor's next marginal is its CPT
    /// contracted with the product of its parents' current marginals under the
    /// given joint action. `models` must hold one entry per factor, in factor
    /// order.
    pub fn predict(
        &self,
        models: &[TransitionFactorModel],
        action: &JointAction,
    ) -> Result<BeliefState, ModelError> {
        if models.len() != self.marginals.len() {
            return Err(ModelError::BeliefArity {
                expected: models.len(),
                got: self.marginals.len(),
            });
        }
        let mut next = Vec::with_capacity(models.len());
        for model in models {
            let wiring = &model.wiring;
            debug_assert!(wiring.child_index < self.marginals.len());
            let controls = wiring.controls_of(action);
            for (m, &parent_index) in wiring.state_parent_indices.iter().enumerate() {
                let got = self.marginals[parent_index].len();
                if got != wiring.state_parent_cards[m] {
                    return Err(ModelError::MarginalCardinality {
                        factor: wiring.state_parents[m].clone(),
                        expected: wiring.state_parent_cards[m],
                        got,
                    });
                }
            }
            let supports: Vec<Vec<(usize, f64)>> = wiring
                .state_parent_indices
                .iter()
                .map(|&i| self.marginals[i].support().collect())
                .collect();
            let mut probs = vec![0.0; wiring.child_cardinality];
            let mut config = vec![0usize; supports.len()];
            visit_support(&supports, &mut config, 1.0, &mut |states, weight| {
                let column = model.column(states, &controls);
                for (p, &q) in probs.iter_mut().zip(column.probs()) {
                    *p += weight * q;
                }
            });
            next.push(Categorical::from_probs(probs)?);
        }
        Ok(BeliefState { marginals: next })
    }
}
