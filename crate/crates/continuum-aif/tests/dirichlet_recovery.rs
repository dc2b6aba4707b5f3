//! Learning sanity check: accumulating observed one-hot transitions into
//! Dirichlet counts must recover the generating conditional table.
//!
//! Ten thousand draws per column against a unit prior leaves at most a few
//! parts per thousand of prior mass per cell, so the normalized counts land
//! within 0.05 total variation of the truth for every column.

mod common;

use common::random_distribution;
use continuum_aif::{BeliefState, ControlSpace, DirichletCounts, FactorSpace, FactorWiring};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn counts_recover_generating_table() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let factors = FactorSpace::new(vec![
        ("Child", vec!["c0", "c1", "c2"]),
        ("Parent", vec!["p0", "p1", "p2"]),
    ])
    .unwrap();
    let controls = ControlSpace::new(vec![("Act", vec!["a0", "a1"])]).unwrap();
    let wiring =
        FactorWiring::resolve("Child", &["Parent"], &["Act"], &factors, &controls).unwrap();

    let truth: Vec<_> = (0..wiring.column_count())
        .map(|_| random_distribution(&mut rng, 3))
        .collect();

    let mut counts = DirichletCounts::uniform_prior(wiring.clone(), 1.0).unwrap();
    for parent in 0..3 {
        for act in 0..2 {
            let column = &truth[wiring.column_index(&[parent], &[act])];
            for _ in 0..10_000 {
                let draw: f64 = rng.gen();
                let mut acc = 0.0;
                let mut child = 0;
                for (value, p) in column.support() {
                    acc += p;
                    child = value;
                    if draw < acc {
                        break;
                    }
                }
                let prev = BeliefState::delta(&factors, &[0, parent]).unwrap();
                let next = BeliefState::delta(&factors, &[child, parent]).unwrap();
                counts.accumulate(&prev, &vec![act], &next, 1.0).unwrap();
            }
        }
    }

    let learned = counts.normalize().unwrap();
    for parent in 0..3 {
        for act in 0..2 {
            let want = &truth[wiring.column_index(&[parent], &[act])];
            let got = learned.column(&[parent], &[act]);
            let l1: f64 = (0..3)
                .map(|v| (got.prob(v) - want.prob(v)).abs())
                .sum();
            assert!(
                l1 < 0.05,
                "column (parent={parent}, act={act}) off by L1 {l1}"
            );
        }
    }
}
