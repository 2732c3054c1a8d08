mod common;

use arbac_core::analyzer::AnalysisError;
use arbac_core::{analyze, oracle_reach, reach, replay, Engine, Outcome, SearchLimits};
use common::{random_policy, Shape};

const SEEDS: u64 = 500;

#[test]
fn bfs_agrees_with_oracle() {
    let mut reachable = 0;
    for seed in 0..SEEDS {
        let p = random_policy(seed, Shape::SMALL);
        let q = &p.queries[0];
        let oracle = oracle_reach(&p, q).unwrap();
        assert!(oracle.exhausted || matches!(oracle.outcome, Outcome::Reachable(_)));
        for slicing in [false, true] {
            let v = reach(&p, q, SearchLimits::unlimited(), slicing).unwrap();
            assert!(
                v.outcome.same_answer(&oracle.outcome),
                "seed {seed} slicing {slicing}: {:?} vs {:?}",
                v.outcome,
                oracle.outcome
            );
            if let Some(w) = v.outcome.witness() {
                assert!(replay(&p, q, w), "seed {seed}: witness does not replay");
                assert_eq!(
                    w.len(),
                    oracle.outcome.witness().unwrap().len(),
                    "seed {seed}"
                );
            }
        }
        if let Some(w) = oracle.outcome.witness() {
            assert!(replay(&p, q, w));
            reachable += 1;
        }
    }
    // the generator should exercise both answers
    assert!(reachable > 50 && reachable < 450, "{reachable}");
}

#[test]
fn modular_agrees_with_oracle_when_applicable() {
    let shape = Shape {
        max_cr: 8,
        hierarchy: false,
        initial: false,
        ..Shape::SMALL
    };
    let mut applicable = 0;
    for seed in 0..SEEDS {
        let mut p = random_policy(seed, shape);
        // make every role revocable so the split applies more often
        p.cr = p.roles[1..]
            .iter()
            .map(|r| arbac_core::CanRevokeRule::new(p.roles[0].clone(), r.clone()))
            .collect();
        let q = p.queries[0].clone();
        let oracle = oracle_reach(&p, &q).unwrap();
        for slicing in [false, true] {
            match analyze(&p, &q, SearchLimits::unlimited(), slicing, Engine::Modular) {
                Ok((_, v)) => {
                    applicable += 1;
                    assert!(v.outcome.same_answer(&oracle.outcome), "seed {seed}");
                    if let Some(w) = v.outcome.witness() {
                        assert!(replay(&p, &q, w), "seed {seed}");
                    }
                }
                Err(AnalysisError::ModularNotApplicable(_)) => {}
                Err(e) => panic!("seed {seed}: {e}"),
            }
        }
        let (_, auto) = analyze(&p, &q, SearchLimits::unlimited(), true, Engine::Auto).unwrap();
        assert!(auto.outcome.same_answer(&oracle.outcome), "seed {seed}");
    }
    assert!(applicable >= 500, "{applicable}");
}
