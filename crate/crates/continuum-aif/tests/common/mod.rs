//! Shared helpers for integration tests: an exact joint-state reference
//! evaluator and generators for random factored models.
//!
//! The evaluator below is deliberately naive. It tracks the full joint
//! distribution over states instead of per-factor marginals, so its output
//! is exact wherever the joint stays small enough to enumerate. Tests use it
//! as an independent check on the mean-field engine in the regimes where the
//! two provably coincide (one step from any product belief, two steps from a
//! delta belief).

#![allow(dead_code)]

use continuum_aif::efe::PolicyEvaluation;
use continuum_aif::{
    BeliefState, Categorical, ControlSpace, FactorSpace, Policy, PreferenceModel,
    TransitionFactorModel,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn decode(mut idx: usize, cards: &[usize]) -> Vec<usize> {
    let mut states = vec![0; cards.len()];
    for i in (0..cards.len()).rev() {
        states[i] = idx % cards[i];
        idx /= cards[i];
    }
    states
}

fn spread_product(columns: &[&Categorical], cards: &[usize], weight: f64, next: &mut [f64]) {
    fn rec(
        columns: &[&Categorical],
        cards: &[usize],
        depth: usize,
        idx: usize,
        w: f64,
        next: &mut [f64],
    ) {
        if depth == columns.len() {
            next[idx] += w;
            return;
        }
        for (value, q) in columns[depth].support() {
            rec(columns, cards, depth + 1, idx * cards[depth] + value, w * q, next);
        }
    }
    rec(columns, cards, 0, 0, weight, next);
}

/// Scores a policy by exact joint-state propagation.
///
/// Applies the same per-step aggregation as the engine (preference dot
/// products and marginal entropies, averaged over the horizon) but computes
/// each step's marginals from the exactly propagated joint distribution.
pub fn exact_policy_evaluation(
    policy: &Policy,
    belief: &BeliefState,
    models: &[TransitionFactorModel],
    preferences: &PreferenceModel,
) -> PolicyEvaluation {
    let cards: Vec<usize> = models.iter().map(|m| m.wiring.child_cardinality).collect();
    let joint_len: usize = cards.iter().product();
    assert!(joint_len <= 1 << 20, "joint space too large for the oracle");

    let mut dist = vec![0.0; joint_len];
    for (idx, slot) in dist.iter_mut().enumerate() {
        let states = decode(idx, &cards);
        *slot = states
            .iter()
            .enumerate()
            .map(|(i, &s)| belief.marginal(i).prob(s))
            .product();
    }

    let mut pragmatic = 0.0;
    let mut info = 0.0;
    for action in &policy.steps {
        let mut next = vec![0.0; joint_len];
        for (idx, &p) in dist.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let states = decode(idx, &cards);
            let columns: Vec<&Categorical> = models
                .iter()
                .map(|m| {
                    let parents: Vec<usize> = m
                        .wiring
                        .state_parent_indices
                        .iter()
                        .map(|&j| states[j])
                        .collect();
                    let ctrls = m.wiring.controls_of(action);
                    m.column(&parents, &ctrls)
                })
                .collect();
            spread_product(&columns, &cards, p, &mut next);
        }
        for (i, &card) in cards.iter().enumerate() {
            let mut marginal = vec![0.0; card];
            for (idx, &p) in next.iter().enumerate() {
                marginal[decode(idx, &cards)[i]] += p;
            }
            pragmatic += marginal
                .iter()
                .zip(preferences.modality(i))
                .map(|(q, c)| q * c)
                .sum::<f64>();
            info += marginal
                .iter()
                .filter(|&&q| q > 0.0)
                .map(|&q| -q * q.ln())
                .sum::<f64>();
        }
        dist = next;
    }

    let steps = policy.len() as f64;
    pragmatic /= steps;
    info /= steps;
    PolicyEvaluation {
        pragmatic_value: pragmatic,
        info_gain: info,
        efe: -pragmatic - info,
    }
}

pub struct RandomModel {
    pub factors: FactorSpace,
    pub controls: ControlSpace,
    pub models: Vec<TransitionFactorModel>,
    pub preferences: PreferenceModel,
}

/// Draws a small factored model with random wiring and random stochastic
/// columns. Joint state count stays at or below 64, so the exact evaluator
/// handles every draw comfortably.
pub fn random_model(rng: &mut ChaCha8Rng) -> RandomModel {
    let n_factors = rng.gen_range(1..=3usize);
    let factor_names: Vec<String> = (0..n_factors).map(|i| format!("F{i}")).collect();
    let factor_labels: Vec<Vec<String>> = (0..n_factors)
        .map(|_| {
            let card = rng.gen_range(2..=4usize);
            (0..card).map(|v| format!("v{v}")).collect()
        })
        .collect();
    let factors = FactorSpace::new(
        factor_names
            .iter()
            .zip(&factor_labels)
            .map(|(n, ls)| (n.as_str(), ls.iter().map(String::as_str).collect()))
            .collect(),
    )
    .unwrap();

    let n_controls = rng.gen_range(1..=2usize);
    let control_names: Vec<String> = (0..n_controls).map(|i| format!("U{i}")).collect();
    let control_labels: Vec<Vec<String>> = (0..n_controls)
        .map(|_| {
            let card = rng.gen_range(2..=3usize);
            (0..card).map(|v| format!("a{v}")).collect()
        })
        .collect();
    let controls = ControlSpace::new(
        control_names
            .iter()
            .zip(&control_labels)
            .map(|(n, ls)| (n.as_str(), ls.iter().map(String::as_str).collect()))
            .collect(),
    )
    .unwrap();

    let mut models = Vec::with_capacity(n_factors);
    for child in 0..n_factors {
        let mut parent_idx: Vec<usize> = (0..n_factors).collect();
        while parent_idx.len() > 2 {
            parent_idx.remove(rng.gen_range(0..parent_idx.len()));
        }
        if parent_idx.len() == 2 && rng.gen_bool(0.3) {
            parent_idx.remove(rng.gen_range(0..2));
        }
        let parents: Vec<&str> = parent_idx
            .iter()
            .map(|&i| factor_names[i].as_str())
            .collect();

        let n_ctrl_parents = rng.gen_range(0..=n_controls);
        let ctrl_parents: Vec<&str> = control_names[..n_ctrl_parents]
            .iter()
            .map(String::as_str)
            .collect();

        let wiring = continuum_aif::FactorWiring::resolve(
            &factor_names[child],
            &parents,
            &ctrl_parents,
            &factors,
            &controls,
        )
        .unwrap();
        let card = factor_labels[child].len();
        let columns: Vec<Categorical> = (0..wiring.column_count())
            .map(|_| random_distribution(rng, card))
            .collect();
        models.push(TransitionFactorModel::new(wiring, columns).unwrap());
    }

    let preferences = PreferenceModel::new(
        &factors,
        factor_names
            .iter()
            .zip(&factor_labels)
            .map(|(n, ls)| {
                let values: Vec<f64> = ls.iter().map(|_| rng.gen_range(-3.0..3.0)).collect();
                (n.as_str(), values)
            })
            .collect(),
    )
    .unwrap();

    RandomModel {
        factors,
        controls,
        models,
        preferences,
    }
}

pub fn random_distribution(rng: &mut ChaCha8Rng, card: usize) -> Categorical {
    let raw: Vec<f64> = (0..card).map(|_| rng.gen::<f64>() + 0.05).collect();
    let sum: f64 = raw.iter().sum();
    Categorical::from_probs(raw.into_iter().map(|v| v / sum).collect()).unwrap()
}

pub fn random_product_belief(rng: &mut ChaCha8Rng, factors: &FactorSpace) -> BeliefState {
    let marginals = (0..factors.len())
        .map(|i| random_distribution(rng, factors.cardinality(i)))
        .collect();
    BeliefState::from_marginals(marginals).unwrap()
}

pub fn random_delta_belief(rng: &mut ChaCha8Rng, factors: &FactorSpace) -> BeliefState {
    let states: Vec<usize> = (0..factors.len())
        .map(|i| rng.gen_range(0..factors.cardinality(i)))
        .collect();
    BeliefState::delta(factors, &states).unwrap()
}
