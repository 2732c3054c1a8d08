//! Separation-of-privilege constraints compiled into can_assign rules.
//!
//! A constraint `<S, t>` says no user may hold more than `t` roles of `S`.
//! It is enforced purely by how assignment is guarded: a role `r` of `S` may
//! only be assigned when the user already holds at most `t - 1` other roles
//! of `S`, and every such situation gets its own rule listing the held roles
//! positively and the rest of `S` negatively. Each rule is one disjunct of
//! the condition "fewer than `t` roles of `S` are held".
//!
//! The monitor compilation goes the other way: it produces rules that let a
//! user into a fresh monitor role exactly when they hold `t + 1` roles of
//! `S`, so a violation becomes a reachability question.

use std::collections::BTreeSet;

use itertools::Itertools;
use thiserror::Error;

use crate::model::{CanAssignRule, Precondition, RoleId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SopError {
    #[error("constraint role set is empty")]
    EmptyRoleSet,
    #[error("role {0} appears twice in the constraint")]
    DuplicateRole(RoleId),
    #[error("limit {limit} out of range 1..={size}")]
    LimitOutOfRange { limit: usize, size: usize },
    #[error("guard role {0} is also constrained")]
    GuardOverlap(RoleId),
    #[error("administrative role {0} is also constrained")]
    InvalidAdmin(RoleId),
    #[error("monitor role {0} is also constrained")]
    MonitorInSet(RoleId),
}

/// `<roles, limit>`: at most `limit` of `roles` held at once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SopConstraint {
    roles: Vec<RoleId>,
    limit: usize,
}

impl SopConstraint {
    pub fn new(roles: Vec<RoleId>, limit: usize) -> Result<Self, SopError> {
        if roles.is_empty() {
            return Err(SopError::EmptyRoleSet);
        }
        let mut seen = BTreeSet::new();
        for role in &roles {
            if !seen.insert(role) {
                return Err(SopError::DuplicateRole(role.clone()));
            }
        }
        if limit == 0 || limit > roles.len() {
            return Err(SopError::LimitOutOfRange {
                limit,
                size: roles.len(),
            });
        }
        Ok(Self { roles, limit })
    }

    pub fn roles(&self) -> &[RoleId] {
        &self.roles
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    pub fn contains(&self, role: &RoleId) -> bool {
        self.roles.contains(role)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SopCompilation {
    pub assign_rules: Vec<CanAssignRule>,
    pub guard: BTreeSet<RoleId>,
    pub admin: RoleId,
}

impl SopCompilation {
    pub fn rules_for(&self, target: &RoleId) -> impl Iterator<Item = &CanAssignRule> {
        let target = target.clone();
        self.assign_rules.iter().filter(move |r| r.target == target)
    }
}

/// Emits, for every target `r` in `S` and every `P ⊆ S \ {r}` with
/// `|P| < t`, the rule `<admin, guard ∧ P ∧ ¬(S \ {r} \ P), r>`.
///
/// Order: targets in constraint order, then subsets by size, then
/// lexicographically by constraint order.
pub fn compile_sop(
    constraint: &SopConstraint,
    guard: &BTreeSet<RoleId>,
    admin: &RoleId,
) -> Result<SopCompilation, SopError> {
    if let Some(role) = guard.iter().find(|r| constraint.contains(r)) {
        return Err(SopError::GuardOverlap(role.clone()));
    }
    if constraint.contains(admin) {
        return Err(SopError::InvalidAdmin(admin.clone()));
    }

    let mut assign_rules = Vec::new();
    for target in &constraint.roles {
        let others: Vec<&RoleId> = constraint.roles.iter().filter(|r| *r != target).collect();
        for size in 0..constraint.limit {
            for held in (0..others.len()).combinations(size) {
                let positive = guard
                    .iter()
                    .cloned()
                    .chain(held.iter().map(|&i| others[i].clone()));
                let negative = others
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| !held.contains(i))
                    .map(|(_, r)| (*r).clone());
                assign_rules.push(CanAssignRule::new(
                    admin.clone(),
                    Precondition::new(positive, negative),
                    target.clone(),
                ));
            }
        }
    }
    Ok(SopCompilation {
        assign_rules,
        guard: guard.clone(),
        admin: admin.clone(),
    })
}

/// One rule `<admin, T, monitor>` per `(t + 1)`-subset `T` of `S`.
pub fn compile_sop_monitor(
    constraint: &SopConstraint,
    monitor: &RoleId,
    admin: &RoleId,
) -> Result<Vec<CanAssignRule>, SopError> {
    if constraint.contains(monitor) {
        return Err(SopError::MonitorInSet(monitor.clone()));
    }
    Ok(constraint
        .roles
        .iter()
        .combinations(constraint.limit + 1)
        .map(|subset| {
            CanAssignRule::new(
                admin.clone(),
                Precondition::new(subset.into_iter().cloned(), []),
                monitor.clone(),
            )
        })
        .collect())
}
