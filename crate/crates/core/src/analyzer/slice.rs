//! Relevance slicing.
//!
//! The relevant set starts at the query target and grows through the
//! precondition literals of every can_assign rule whose target is relevant.
//! With a hierarchy, seniors of the target and of positive literals are
//! relevant too, since holding them authorizes what the rule needs.
//! Revocation can only ever help to satisfy a negative literal, so a
//! can_revoke rule survives only if revoking its target can clear one.

use std::collections::{BTreeSet, HashSet};

use super::AnalysisError;
use crate::model::{authorized_roles, Policy, RoleId, SafetyQuery, UserState};

pub(crate) struct Sliced {
    pub policy: Policy,
    pub ca_origin: Vec<usize>,
    pub cr_origin: Vec<usize>,
}

fn closure_of(policy: &Policy, role: &RoleId) -> BTreeSet<RoleId> {
    authorized_roles(&UserState::new([role.clone()]), &policy.hierarchy)
}

pub(crate) fn slice_with_origins(policy: &Policy, query: &SafetyQuery) -> Sliced {
    let has_hierarchy = !policy.hierarchy.is_empty();
    let closures: Vec<(RoleId, BTreeSet<RoleId>)> = if has_hierarchy {
        policy
            .roles
            .iter()
            .map(|r| (r.clone(), closure_of(policy, r)))
            .collect()
    } else {
        Vec::new()
    };
    let seniors_of = |role: &RoleId| -> Vec<RoleId> {
        closures
            .iter()
            .filter(|(r, c)| r != role && c.contains(role))
            .map(|(r, _)| r.clone())
            .collect()
    };

    let mut relevant: HashSet<RoleId> = HashSet::new();
    let mut work = vec![query.target.clone()];
    let enqueue = |role: &RoleId, work: &mut Vec<RoleId>, relevant: &mut HashSet<RoleId>| {
        if relevant.insert(role.clone()) {
            work.push(role.clone());
        }
    };
    relevant.insert(query.target.clone());
    for s in seniors_of(&query.target) {
        enqueue(&s, &mut work, &mut relevant);
    }
    while let Some(role) = work.pop() {
        for rule in policy.ca.iter().filter(|r| r.target == role) {
            for lit in &rule.pre.positive {
                enqueue(lit, &mut work, &mut relevant);
                for s in seniors_of(lit) {
                    enqueue(&s, &mut work, &mut relevant);
                }
            }
            for lit in &rule.pre.negative {
                enqueue(lit, &mut work, &mut relevant);
            }
        }
    }

    let (ca_origin, ca): (Vec<usize>, Vec<_>) = policy
        .ca
        .iter()
        .enumerate()
        .filter(|(_, r)| relevant.contains(&r.target))
        .map(|(i, r)| (i, r.clone()))
        .unzip();

    let initial = policy.initial_state(&query.user).assigned;
    let negatives: HashSet<&RoleId> = ca.iter().flat_map(|r| r.pre.negative.iter()).collect();
    let clears_negative = |role: &RoleId| {
        if has_hierarchy {
            closure_of(policy, role)
                .iter()
                .any(|r| negatives.contains(r))
        } else {
            negatives.contains(role)
        }
    };
    let (cr_origin, cr): (Vec<usize>, Vec<_>) = policy
        .cr
        .iter()
        .enumerate()
        .filter(|(_, r)| {
            (relevant.contains(&r.target) || initial.contains(&r.target))
                && clears_negative(&r.target)
        })
        .map(|(i, r)| (i, r.clone()))
        .unzip();

    let mut kept: HashSet<RoleId> = relevant;
    kept.extend(initial.iter().cloned());
    if has_hierarchy {
        // keep intermediate roles so closures survive the cut
        let below: Vec<RoleId> = kept.iter().flat_map(|r| closure_of(policy, r)).collect();
        kept.extend(below);
    }
    kept.extend(ca.iter().map(|r| r.admin.clone()));
    kept.extend(cr.iter().map(|r| r.admin.clone()));

    let sliced = Policy {
        roles: policy
            .roles
            .iter()
            .filter(|r| kept.contains(*r))
            .cloned()
            .collect(),
        users: policy.users.clone(),
        ua: policy
            .ua
            .iter()
            .filter(|(_, r)| kept.contains(r))
            .cloned()
            .collect(),
        ca,
        cr,
        hierarchy: crate::model::RoleHierarchy::new(
            policy
                .hierarchy
                .edges
                .iter()
                .filter(|(s, j)| kept.contains(s) && kept.contains(j))
                .cloned()
                .collect(),
        ),
        admin_roles: policy
            .admin_roles
            .iter()
            .filter(|r| kept.contains(*r))
            .cloned()
            .collect(),
        queries: vec![query.clone()],
    };
    Sliced {
        policy: sliced,
        ca_origin,
        cr_origin,
    }
}

/// The verdict-preserving relevance slice of `policy` for `query`. Rule
/// order is preserved; only the given query is kept.
pub fn slice(policy: &Policy, query: &SafetyQuery) -> Result<Policy, AnalysisError> {
    super::check_inputs(policy, query)?;
    Ok(slice_with_origins(policy, query).policy)
}
