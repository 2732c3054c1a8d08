//! Operational semantics of administrative actions.
//!
//! Preconditions are evaluated against the authorized set: the direct
//! assignments plus everything below them in the hierarchy. Negative
//! literals therefore also block roles held only through inheritance.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use super::{CanAssignRule, CanRevokeRule, Policy, Precondition, RoleHierarchy, RoleId, UserState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ActionKind {
    Assign,
    Revoke,
}

impl ActionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ActionKind::Assign => "assign",
            ActionKind::Revoke => "revoke",
        }
    }
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One administrative step: fire `ca[rule_index]` or `cr[rule_index]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Action {
    pub kind: ActionKind,
    pub rule_index: usize,
    pub role: RoleId,
}

impl Action {
    pub fn assign(rule_index: usize, role: RoleId) -> Self {
        Self {
            kind: ActionKind::Assign,
            rule_index,
            role,
        }
    }

    pub fn revoke(rule_index: usize, role: RoleId) -> Self {
        Self {
            kind: ActionKind::Revoke,
            rule_index,
            role,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let section = match self.kind {
            ActionKind::Assign => "CA",
            ActionKind::Revoke => "CR",
        };
        write!(
            f,
            "{} {} via {section}#{}",
            self.kind, self.role, self.rule_index
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ActionError {
    #[error("precondition of the rule for {0} is not satisfied")]
    PreconditionUnsatisfied(RoleId),
    #[error("{0} is already assigned")]
    AlreadyAssigned(RoleId),
    #[error("{0} is not assigned")]
    NotAssigned(RoleId),
    #[error("no {kind} rule with index {index}")]
    NoSuchRule { kind: ActionKind, index: usize },
    #[error("step names {step} but the rule targets {rule}")]
    RoleMismatch { step: RoleId, rule: RoleId },
}

/// Downward closure of the directly assigned roles.
pub fn authorized_roles(state: &UserState, hierarchy: &RoleHierarchy) -> BTreeSet<RoleId> {
    let mut authorized = state.assigned.clone();
    if hierarchy.is_empty() {
        return authorized;
    }
    let mut stack: Vec<&RoleId> = state.assigned.iter().collect();
    while let Some(role) = stack.pop() {
        for junior in hierarchy.juniors(role) {
            if authorized.insert(junior.clone()) {
                stack.push(junior);
            }
        }
    }
    authorized
}

pub fn satisfies(pre: &Precondition, authorized: &BTreeSet<RoleId>) -> bool {
    pre.positive.is_subset(authorized) && pre.negative.is_disjoint(authorized)
}

pub fn apply_assign(
    state: &UserState,
    rule: &CanAssignRule,
    hierarchy: &RoleHierarchy,
) -> Result<UserState, ActionError> {
    if state.holds(&rule.target) {
        return Err(ActionError::AlreadyAssigned(rule.target.clone()));
    }
    if !satisfies(&rule.pre, &authorized_roles(state, hierarchy)) {
        return Err(ActionError::PreconditionUnsatisfied(rule.target.clone()));
    }
    let mut next = state.clone();
    next.assigned.insert(rule.target.clone());
    Ok(next)
}

/// Removes the target only; roles obtained through it are kept.
pub fn apply_revoke(state: &UserState, rule: &CanRevokeRule) -> Result<UserState, ActionError> {
    if !state.holds(&rule.target) {
        return Err(ActionError::NotAssigned(rule.target.clone()));
    }
    let mut next = state.clone();
    next.assigned.remove(&rule.target);
    Ok(next)
}

/// Applies an action by looking its rule up in `policy`.
pub fn apply_action(
    policy: &Policy,
    state: &UserState,
    action: &Action,
) -> Result<UserState, ActionError> {
    let no_rule = || ActionError::NoSuchRule {
        kind: action.kind,
        index: action.rule_index,
    };
    let (target, next) = match action.kind {
        ActionKind::Assign => {
            let rule = policy.ca.get(action.rule_index).ok_or_else(no_rule)?;
            (&rule.target, apply_assign(state, rule, &policy.hierarchy))
        }
        ActionKind::Revoke => {
            let rule = policy.cr.get(action.rule_index).ok_or_else(no_rule)?;
            (&rule.target, apply_revoke(state, rule))
        }
    };
    if *target != action.role {
        return Err(ActionError::RoleMismatch {
            step: action.role.clone(),
            rule: target.clone(),
        });
    }
    next
}

/// Every state-changing action enabled in `state`: all can_assign rules in
/// declaration order, then all can_revoke rules in declaration order.
pub fn applicable_actions(policy: &Policy, state: &UserState) -> Vec<Action> {
    let authorized = authorized_roles(state, &policy.hierarchy);
    let assigns = policy
        .ca
        .iter()
        .enumerate()
        .filter(|(_, rule)| !state.holds(&rule.target) && satisfies(&rule.pre, &authorized))
        .map(|(i, rule)| Action::assign(i, rule.target.clone()));
    let revokes = policy
        .cr
        .iter()
        .enumerate()
        .filter(|(_, rule)| state.holds(&rule.target))
        .map(|(i, rule)| Action::revoke(i, rule.target.clone()));
    assigns.chain(revokes).collect()
}

#[cfg(test)]
mod tests {
    use super::super::test_support::*;
    use super::super::{RoleHierarchy, UserState};
    use super::*;
    use crate::model::Policy;

    fn edges(pairs: &[(&str, &str)]) -> RoleHierarchy {
        RoleHierarchy::new(pairs.iter().map(|(s, j)| (role(s), role(j))).collect())
    }

    fn state(names: &[&str]) -> UserState {
        UserState::new(names.iter().map(|r| role(r)))
    }

    const NON_MANAGERIAL: [&str; 4] = ["FA-Asst", "FA-Specialist", "FA-Senior", "FA-Junior"];

    /// The eleven FA-Clerk rules of the bank case study as
    /// (positive extras, negatives).
    pub(crate) fn fa_clerk_rules() -> Vec<CanAssignRule> {
        let rows: [&[&str]; 11] = [
            &[],
            &["FA-Asst"],
            &["FA-Specialist"],
            &["FA-Senior"],
            &["FA-Junior"],
            &["FA-Senior", "FA-Junior"],
            &["FA-Specialist", "FA-Junior"],
            &["FA-Specialist", "FA-Senior"],
            &["FA-Asst", "FA-Junior"],
            &["FA-Asst", "FA-Senior"],
            &["FA-Asst", "FA-Specialist"],
        ];
        rows.iter()
            .map(|held| {
                let mut pos = vec!["FA"];
                pos.extend_from_slice(held);
                let neg: Vec<&str> = NON_MANAGERIAL
                    .iter()
                    .copied()
                    .filter(|r| !held.contains(r))
                    .collect();
                ca("Admin", &pos, &neg, "FA-Clerk")
            })
            .collect()
    }

    #[test]
    fn closure_examples() {
        let h = edges(&[("FA-Clerk", "FA"), ("FA", "Employee")]);
        assert_eq!(
            authorized_roles(&state(&["FA-Clerk"]), &h),
            roles(["FA-Clerk", "FA", "Employee"])
        );
        assert_eq!(
            authorized_roles(&state(&["FA"]), &RoleHierarchy::default()),
            roles(["FA"])
        );
        let h = edges(&[("FA-Clerk", "FA"), ("FA", "Employee"), ("ST", "Employee")]);
        assert_eq!(
            authorized_roles(&state(&["FA-Clerk", "ST"]), &h),
            roles(["FA-Clerk", "FA", "ST", "Employee"])
        );
    }

    #[test]
    fn closure_terminates_on_cycles() {
        let h = edges(&[("A", "B"), ("B", "A")]);
        assert_eq!(authorized_roles(&state(&["A"]), &h), roles(["A", "B"]));
    }

    #[test]
    fn satisfies_examples() {
        let p = pre(&["FA"], &["FA-Asst"]);
        assert!(satisfies(&p, &roles(["FA", "FA-Senior"])));
        assert!(!satisfies(&p, &roles(["FA", "FA-Asst"])));
        assert!(satisfies(&Precondition::always(), &BTreeSet::new()));
    }

    #[test]
    fn negative_literal_sees_inherited_roles() {
        let h = edges(&[("Boss", "FA-Asst")]);
        let authorized = authorized_roles(&state(&["FA", "Boss"]), &h);
        assert!(!satisfies(&pre(&["FA"], &["FA-Asst"]), &authorized));
    }

    #[test]
    fn assign_fa_clerk_rows() {
        let rules = fa_clerk_rules();
        let none = RoleHierarchy::default();
        let next = apply_assign(&state(&["FA"]), &rules[0], &none).unwrap();
        assert_eq!(next, state(&["FA", "FA-Clerk"]));

        let s = state(&["FA", "FA-Asst", "FA-Specialist"]);
        let next = apply_assign(&s, &rules[10], &none).unwrap();
        assert!(next.holds(&role("FA-Clerk")));
        // input untouched
        assert!(!s.holds(&role("FA-Clerk")));

        assert_eq!(
            apply_assign(&state(&["FA", "FA-Asst"]), &rules[0], &none),
            Err(ActionError::PreconditionUnsatisfied(role("FA-Clerk")))
        );
        assert_eq!(
            apply_assign(&state(&["FA", "FA-Clerk"]), &rules[0], &none),
            Err(ActionError::AlreadyAssigned(role("FA-Clerk")))
        );
    }

    #[test]
    fn revoke_is_not_cascading() {
        let rule = |t: &str| CanRevokeRule::new(role("Admin"), role(t));
        let s = state(&["FA", "FA-Clerk"]);
        assert_eq!(apply_revoke(&s, &rule("FA-Clerk")).unwrap(), state(&["FA"]));
        assert_eq!(apply_revoke(&s, &rule("FA")).unwrap(), state(&["FA-Clerk"]));
        assert_eq!(
            apply_revoke(&state(&["FA"]), &rule("FA-Clerk")),
            Err(ActionError::NotAssigned(role("FA-Clerk")))
        );
    }

    fn fa_clerk_policy() -> Policy {
        Policy {
            ca: fa_clerk_rules(),
            ..Policy::default()
        }
    }

    #[test]
    fn applicable_actions_examples() {
        let p = fa_clerk_policy();
        let actions = applicable_actions(&p, &state(&["FA", "FA-Asst", "FA-Specialist"]));
        assert_eq!(actions, vec![Action::assign(10, role("FA-Clerk"))]);

        assert!(applicable_actions(&p, &state(&["FA-Clerk"])).is_empty());

        let p = Policy {
            ca: vec![ca("Admin", &[], &[], "Employee")],
            ..Policy::default()
        };
        assert_eq!(applicable_actions(&p, &UserState::default()).len(), 1);
    }

    #[test]
    fn revokes_follow_assigns() {
        let p = Policy {
            ca: vec![ca("Admin", &[], &[], "B")],
            cr: vec![CanRevokeRule::new(role("Admin"), role("A"))],
            ..Policy::default()
        };
        let actions = applicable_actions(&p, &state(&["A"]));
        assert_eq!(
            actions,
            vec![Action::assign(0, role("B")), Action::revoke(0, role("A"))]
        );
    }

    /// For FA held plus any subset X of the four other non-managerial
    /// roles, exactly one FA-Clerk rule fires when |X| <= 2 and none otherwise.
    #[test]
    fn fa_clerk_exactly_one_rule_per_small_subset() {
        let p = fa_clerk_policy();
        for mask in 0u32..16 {
            let mut held = vec!["FA"];
            held.extend(
                NON_MANAGERIAL
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, r)| *r),
            );
            let n = applicable_actions(&p, &state(&held)).len();
            let expected = usize::from(mask.count_ones() <= 2);
            assert_eq!(n, expected, "subset {held:?}");
        }
    }

    #[test]
    fn apply_action_checks_role_and_index() {
        let p = fa_clerk_policy();
        let s = state(&["FA"]);
        assert!(apply_action(&p, &s, &Action::assign(0, role("FA-Clerk"))).is_ok());
        assert!(matches!(
            apply_action(&p, &s, &Action::assign(0, role("FA"))),
            Err(ActionError::RoleMismatch { .. })
        ));
        assert!(matches!(
            apply_action(&p, &s, &Action::assign(99, role("FA-Clerk"))),
            Err(ActionError::NoSuchRule { .. })
        ));
    }
}
