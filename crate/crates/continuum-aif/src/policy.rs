//! Exhaustive policy enumeration over joint actions.

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::space::{ControlSpace, JointAction};

/// A fixed-length sequence of joint actions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    pub steps: Vec<JointAction>,
}

impl Policy {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn first_action(&self) -> &JointAction {
        &self.steps[0]
    }
}

/// All |U|^pl policies of length `pl`, in lexicographic order of their flat
/// joint-action indices with step 0 most significant. Index 0 repeats the
/// all-first-labels action at every step.
pub fn enumerate_policies(
    controls: &ControlSpace,
    policy_length: usize,
) -> Result<Vec<Policy>, ModelError> {
    if policy_length == 0 {
        return Err(ModelError::EmptyPolicy);
    }
    let action_count = controls.joint_action_count();
    let total = action_count
        .checked_pow(policy_length as u32)
        .ok_or(ModelError::EmptyPolicy)?;
    let mut policies = Vec::with_capacity(total);
    let mut digits = vec![0usize; policy_length];
    loop {
        policies.push(Policy {
            steps: digits.iter().map(|&d| controls.action_at(d)).collect(),
        });
        // increment the least significant step first
        let mut level = policy_length;
        loop {
            if level == 0 {
                return Ok(policies);
            }
            level -= 1;
            digits[level] += 1;
            if digits[level] < action_count {
                break;
            }
            digits[level] = 0;
        }
    }
}
