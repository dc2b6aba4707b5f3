//! Discrete probability vectors with validation, entropy, and expectation.

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Tolerance for "sums to one" checks on probability vectors.
pub const PROB_EPS: f64 = 1e-9;

/// A categorical distribution over a fixed number of outcomes.
///
/// The probability vector is validated at construction: entries are
/// non-negative and sum to one within [`PROB_EPS`]. Entries are stored as
/// given, without rescaling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Categorical {
    probs: Vec<f64>,
}

impl Categorical {
    pub fn from_probs(probs: Vec<f64>) -> Result<Self, ModelError> {
        if probs.is_empty() {
            return Err(ModelError::EmptyDistribution);
        }
        for (index, &value) in probs.iter().enumerate() {
            if !(value >= 0.0) {
                return Err(ModelError::NegativeProbability { index, value });
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_EPS {
            return Err(ModelError::InvalidDistribution { sum });
        }
        Ok(Self { probs })
    }

    /// All mass on one outcome.
    pub fn delta(cardinality: usize, index: usize) -> Result<Self, ModelError> {
        if index >= cardinality {
            return Err(ModelError::IndexOutOfRange { index, cardinality });
        }
        let mut probs = vec![0.0; cardinality];
        probs[index] = 1.0;
        Ok(Self { probs })
    }

    pub fn uniform(cardinality: usize) -> Result<Self, ModelError> {
        if cardinality == 0 {
            return Err(ModelError::EmptyDistribution);
        }
        Ok(Self {
            probs: vec![1.0 / cardinality as f64; cardinality],
        })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn prob(&self, index: usize) -> f64 {
        self.probs[index]
    }

    /// Shannon entropy in nats, with the 0 ln 0 = 0 convention.
    pub fn entropy(&self) -> f64 {
        self.probs
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.ln())
            .sum()
    }

    /// Expectation of `values` under this distribution.
    pub fn dot(&self, values: &[f64]) -> f64 {
        self.probs
            .iter()
            .zip(values)
            .map(|(&p, &v)| p * v)
            .sum()
    }

    /// Index of the largest probability; first index wins exact ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.probs.iter().enumerate().skip(1) {
            if p > self.probs[best] {
                best = i;
            }
        }
        best
    }

    /// Outcomes carrying positive mass.
    pub fn support(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.probs
            .iter()
            .copied()
            .enumerate()
            .filter(|&(_, p)| p > 0.0)
    }
}

impl TryFrom<Vec<f64>> for Categorical {
    type Error = ModelError;

    fn try_from(probs: Vec<f64>) -> Result<Self, Self::Error> {
        Self::from_probs(probs)
    }
}

impl From<Categorical> for Vec<f64> {
    fn from(c: Categorical) -> Self {
        c.probs
    }
}
