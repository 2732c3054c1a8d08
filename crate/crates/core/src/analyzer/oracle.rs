//! Reference engine for differential testing.
//!
//! Works directly on [`UserState`] sets through the core model operations:
//! no slicing, no bitsets, no early exit. It enumerates every reachable
//! state breadth-first, then reports the first-discovered goal state, which
//! is at minimal depth.

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use super::{check_inputs, AnalysisError, Outcome, Verdict, Witness};
use crate::model::{
    applicable_actions, apply_action, authorized_roles, Action, Policy, SafetyQuery, UserState,
};

pub const DEFAULT_ORACLE_CAP: usize = 20;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("policy declares {roles} roles, above the oracle cap of {cap}")]
    TooLarge { roles: usize, cap: usize },
    #[error(transparent)]
    Invalid(#[from] AnalysisError),
}

pub fn oracle_reach(policy: &Policy, query: &SafetyQuery) -> Result<Verdict, OracleError> {
    oracle_reach_with_cap(policy, query, DEFAULT_ORACLE_CAP)
}

pub fn oracle_reach_with_cap(
    policy: &Policy,
    query: &SafetyQuery,
    cap: usize,
) -> Result<Verdict, OracleError> {
    if policy.roles.len() > cap {
        return Err(OracleError::TooLarge {
            roles: policy.roles.len(),
            cap,
        });
    }
    check_inputs(policy, query)?;

    let initial = policy.initial_state(&query.user);
    let mut order: Vec<UserState> = vec![initial.clone()];
    let mut parent: HashMap<UserState, Option<(UserState, Action)>> = HashMap::new();
    parent.insert(initial.clone(), None);
    let mut queue = VecDeque::from([initial]);

    while let Some(state) = queue.pop_front() {
        for action in applicable_actions(policy, &state) {
            let next = apply_action(policy, &state, &action).expect("applicable actions apply");
            if !parent.contains_key(&next) {
                parent.insert(next.clone(), Some((state.clone(), action)));
                order.push(next.clone());
                queue.push_back(next);
            }
        }
    }

    let goal = order
        .iter()
        .find(|s| authorized_roles(s, &policy.hierarchy).contains(&query.target));
    let outcome = match goal {
        None => Outcome::Unreachable,
        Some(goal) => {
            let mut steps = Vec::new();
            let mut cursor = goal;
            while let Some(Some((prev, action))) = parent.get(cursor) {
                steps.push(action.clone());
                cursor = prev;
            }
            steps.reverse();
            Outcome::Reachable(Witness { steps })
        }
    };
    Ok(Verdict {
        outcome,
        states_explored: order.len(),
        exhausted: true,
        sliced_role_count: policy.roles.len(),
    })
}
