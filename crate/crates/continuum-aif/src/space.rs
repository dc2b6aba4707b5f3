//! Named state factors and control dimensions with label lookup.

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// One named state modality and its ordered label set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Factor {
    pub name: String,
    pub labels: Vec<String>,
}

/// The ordered collection of state factors of one agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorSpace {
    factors: Vec<Factor>,
}

/// One named control dimension and its ordered action labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Control {
    pub name: String,
    pub labels: Vec<String>,
}

/// The ordered collection of control dimensions of one agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSpace {
    controls: Vec<Control>,
}

/// One chosen action index per control dimension, in control order.
pub type JointAction = Vec<usize>;

fn check_labels(name: &str, labels: &[String]) -> Result<(), ModelError> {
    if labels.is_empty() {
        return Err(ModelError::EmptyLabels {
            name: name.to_string(),
        });
    }
    for (i, label) in labels.iter().enumerate() {
        if labels[..i].contains(label) {
            return Err(ModelError::DuplicateLabel {
                name: name.to_string(),
                label: label.clone(),
            });
        }
    }
    Ok(())
}

impl FactorSpace {
    pub fn new(factors: Vec<(&str, Vec<&str>)>) -> Result<Self, ModelError> {
        let factors: Vec<Factor> = factors
            .into_iter()
            .map(|(name, labels)| Factor {
                name: name.to_string(),
                labels: labels.into_iter().map(str::to_string).collect(),
            })
            .collect();
        for (i, f) in factors.iter().enumerate() {
            if factors[..i].iter().any(|g| g.name == f.name) {
                return Err(ModelError::DuplicateFactor {
                    name: f.name.clone(),
                });
            }
            check_labels(&f.name, &f.labels)?;
        }
        Ok(Self { factors })
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn factor(&self, index: usize) -> &Factor {
        &self.factors[index]
    }

    pub fn cardinality(&self, index: usize) -> usize {
        self.factors[index].labels.len()
    }

    pub fn index_of(&self, name: &str) -> Result<usize, ModelError> {
        self.factors
            .iter()
            .position(|f| f.name == name)
            .ok_or_else(|| ModelError::UnknownModality {
                modality: name.to_string(),
            })
    }

    pub fn label_index(&self, factor: usize, label: &str) -> Result<usize, ModelError> {
        let f = &self.factors[factor];
        f.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| ModelError::UnknownLabel {
                modality: f.name.clone(),
                label: label.to_string(),
            })
    }
}

impl ControlSpace {
    pub fn new(controls: Vec<(&str, Vec<&str>)>) -> Result<Self, ModelError> {
        let controls: Vec<Control> = controls
            .into_iter()
            .map(|(name, labels)| Control {
                name: name.to_string(),
                labels: labels.into_iter().map(str::to_string).collect(),
            })
            .collect();
        for (i, c) in controls.iter().enumerate() {
            if controls[..i].iter().any(|d| d.name == c.name) {
                return Err(ModelError::DuplicateControl {
                    name: c.name.clone(),
                });
            }
            check_labels(&c.name, &c.labels)?;
        }
        Ok(Self { controls })
    }

    pub fn len(&self) -> usize {
        self.controls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.controls.is_empty()
    }

    pub fn controls(&self) -> &[Control] {
        &self.controls
    }

    pub fn control(&self, index: usize) -> &Control {
        &self.controls[index]
    }

    pub fn cardinality(&self, index: usize) -> usize {
        self.controls[index].labels.len()
    }

    pub fn index_of(&self, name: &str) -> Result<usize, ModelError> {
        self.controls
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| ModelError::UnknownControl {
                control: name.to_string(),
            })
    }

    /// Number of distinct joint actions (product of per-control cardinalities).
    pub fn joint_action_count(&self) -> usize {
        self.controls.iter().map(|c| c.labels.len()).product()
    }

    /// Flat index of a joint action; the first control is most significant.
    pub fn flat_index(&self, action: &JointAction) -> Result<usize, ModelError> {
        if action.len() != self.controls.len() {
            return Err(ModelError::ActionArity {
                expected: self.controls.len(),
                got: action.len(),
            });
        }
        let mut flat = 0;
        for (control, &choice) in self.controls.iter().zip(action) {
            if choice >= control.labels.len() {
                return Err(ModelError::ActionOutOfRange {
                    control: control.name.clone(),
                    index: choice,
                });
            }
            flat = flat * control.labels.len() + choice;
        }
        Ok(flat)
    }

    /// Joint action for a flat index, inverse of [`Self::flat_index`].
    pub fn action_at(&self, mut flat: usize) -> JointAction {
        let mut action = vec![0; self.controls.len()];
        for (slot, control) in action.iter_mut().zip(&self.controls).rev() {
            let card = control.labels.len();
            *slot = flat % card;
            flat /= card;
        }
        action
    }

    pub fn action_labels(&self, action: &JointAction) -> Vec<String> {
        self.controls
            .iter()
            .zip(action)
            .map(|(c, &i)| c.labels[i].clone())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_controls() -> ControlSpace {
        ControlSpace::new(vec![
            ("a", vec!["x", "y", "z"]),
            ("b", vec!["p", "q"]),
        ])
        .unwrap()
    }

    #[test]
    fn rejects_duplicates() {
        assert!(FactorSpace::new(vec![("f", vec!["a"]), ("f", vec!["b"])]).is_err());
        assert!(FactorSpace::new(vec![("f", vec!["a", "a"])]).is_err());
        assert!(ControlSpace::new(vec![("c", vec![])]).is_err());
    }

    #[test]
    fn flat_index_is_lexicographic_first_control_most_significant() {
        let cs = two_controls();
        assert_eq!(cs.joint_action_count(), 6);
        let mut seen = Vec::new();
        for flat in 0..6 {
            let action = cs.action_at(flat);
            assert_eq!(cs.flat_index(&action).unwrap(), flat);
            seen.push(action);
        }
        assert_eq!(seen[0], vec![0, 0]);
        assert_eq!(seen[1], vec![0, 1]);
        assert_eq!(seen[2], vec![1, 0]);
        assert_eq!(seen[5], vec![2, 1]);
    }

    #[test]
    fn label_lookup_errors_name_the_modality() {
        let fs = FactorSpace::new(vec![("FPS", vec!["12", "16"])]).unwrap();
        let err = fs.label_index(0, "25").unwrap_err();
        assert!(err.to_string().contains("FPS"));
        assert!(err.to_string().contains("25"));
    }
}
