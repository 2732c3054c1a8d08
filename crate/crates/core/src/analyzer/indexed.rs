//! Dense bitset encoding of a policy for one query.

use std::collections::HashMap;

use super::bits::{self, Bits};
use crate::model::{Action, Policy, RoleId, SafetyQuery};

pub(crate) struct AssignRule {
    pub pos: Bits,
    pub neg: Bits,
    pub target: usize,
    /// Index in the unsliced policy's CA list.
    pub origin: usize,
}

pub(crate) struct RevokeRule {
    pub target: usize,
    pub origin: usize,
}

pub(crate) struct Indexed {
    pub roles: Vec<RoleId>,
    pub words: usize,
    /// Per role: the role and everything below it. `None` without hierarchy.
    pub closure: Option<Vec<Bits>>,
    pub assigns: Vec<AssignRule>,
    pub revokes: Vec<RevokeRule>,
    pub initial: Bits,
    pub target: usize,
}

impl Indexed {
    /// `policy` must be well-formed and declare the query's names.
    pub fn new(
        policy: &Policy,
        query: &SafetyQuery,
        ca_origin: &[usize],
        cr_origin: &[usize],
    ) -> Self {
        let index: HashMap<&RoleId, usize> = policy
            .roles
            .iter()
            .enumerate()
            .map(|(i, r)| (r, i))
            .collect();
        let words = bits::words_for(policy.roles.len());
        let mask = |roles: &mut dyn Iterator<Item = &RoleId>| {
            let mut b = bits::empty(words);
            for r in roles {
                bits::set(&mut b, index[r]);
            }
            b
        };

        let closure = (!policy.hierarchy.is_empty()).then(|| {
            let mut juniors = vec![Vec::new(); policy.roles.len()];
            for (senior, junior) in &policy.hierarchy.edges {
                juniors[index[senior]].push(index[junior]);
            }
            (0..policy.roles.len())
                .map(|start| {
                    let mut seen = bits::empty(words);
                    let mut stack = vec![start];
                    bits::set(&mut seen, start);
                    while let Some(r) = stack.pop() {
                        for &j in &juniors[r] {
                            if !bits::has(&seen, j) {
                                bits::set(&mut seen, j);
                                stack.push(j);
                            }
                        }
                    }
                    seen
                })
                .collect()
        });

        let assigns = policy
            .ca
            .iter()
            .zip(ca_origin)
            .map(|(rule, &origin)| AssignRule {
                pos: mask(&mut rule.pre.positive.iter()),
                neg: mask(&mut rule.pre.negative.iter()),
                target: index[&rule.target],
                origin,
            })
            .collect();
        let revokes = policy
            .cr
            .iter()
            .zip(cr_origin)
            .map(|(rule, &origin)| RevokeRule {
                target: index[&rule.target],
                origin,
            })
            .collect();
        let initial = mask(
            &mut policy
                .ua
                .iter()
                .filter(|(u, _)| *u == query.user)
                .map(|(_, r)| r),
        );

        Self {
            roles: policy.roles.clone(),
            words,
            closure,
            assigns,
            revokes,
            initial,
            target: index[&query.target],
        }
    }

    pub fn authorized(&self, state: &[u64]) -> Bits {
        match &self.closure {
            None => state.into(),
            Some(closure) => {
                let mut out = bits::empty(self.words);
                for r in bits::ones(state) {
                    bits::union_with(&mut out, &closure[r]);
                }
                out
            }
        }
    }

    pub fn is_goal(&self, state: &[u64]) -> bool {
        match &self.closure {
            None => bits::has(state, self.target),
            Some(closure) => bits::ones(state).any(|r| bits::has(&closure[r], self.target)),
        }
    }

    /// Applicable, state-changing moves in enumeration order: assigns
    /// first, then revokes. Move `m < assigns.len()` is an assign.
    pub fn moves<'a>(&'a self, state: &'a [u64]) -> impl Iterator<Item = (usize, Bits)> + 'a {
        let auth = self.authorized(state);
        let assigns = self
            .assigns
            .iter()
            .enumerate()
            .filter(move |(_, rule)| {
                !bits::has(state, rule.target)
                    && bits::subset(&rule.pos, &auth)
                    && bits::disjoint(&rule.neg, &auth)
            })
            .map(move |(i, rule)| {
                let mut next = Bits::from_slice(state);
                bits::set(&mut next, rule.target);
                (i, next)
            });
        let offset = self.assigns.len();
        let revokes = self
            .revokes
            .iter()
            .enumerate()
            .filter(move |(_, rule)| bits::has(state, rule.target))
            .map(move |(i, rule)| {
                let mut next = Bits::from_slice(state);
                bits::clear(&mut next, rule.target);
                (offset + i, next)
            });
        assigns.chain(revokes)
    }

    /// Translates a move into a witness step against the unsliced policy.
    pub fn action(&self, mv: usize) -> Action {
        if mv < self.assigns.len() {
            let rule = &self.assigns[mv];
            Action::assign(rule.origin, self.roles[rule.target].clone())
        } else {
            let rule = &self.revokes[mv - self.assigns.len()];
            Action::revoke(rule.origin, self.roles[rule.target].clone())
        }
    }
}
