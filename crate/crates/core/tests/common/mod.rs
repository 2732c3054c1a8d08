#![allow(dead_code)]

use std::collections::BTreeSet;

use arbac_core::{
    CanAssignRule, CanRevokeRule, Policy, Precondition, RoleHierarchy, RoleId, SafetyQuery, UserId,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn role(name: &str) -> RoleId {
    RoleId::new(name).unwrap()
}

pub fn user(name: &str) -> UserId {
    UserId::new(name).unwrap()
}

#[derive(Debug, Clone, Copy)]
pub struct Shape {
    /// Total roles including `Admin`.
    pub max_roles: usize,
    pub max_ca: usize,
    pub max_cr: usize,
    pub hierarchy: bool,
    pub initial: bool,
}

impl Shape {
    pub const SMALL: Shape = Shape {
        max_roles: 8,
        max_ca: 12,
        max_cr: 4,
        hierarchy: true,
        initial: true,
    };
}

/// A well-formed random policy with one query for user `u`.
pub fn random_policy(seed: u64, shape: Shape) -> Policy {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let admin = role("Admin");
    let n = rng.gen_range(1..shape.max_roles);
    let names: Vec<RoleId> = (0..n).map(|i| role(&format!("r{i}"))).collect();
    let u = user("u");

    let mut ca = Vec::new();
    for _ in 0..rng.gen_range(0..=shape.max_ca) {
        let target = rng.gen_range(0..n);
        let mut pos = BTreeSet::new();
        let mut neg = BTreeSet::new();
        for (i, r) in names.iter().enumerate() {
            if i == target {
                continue;
            }
            match rng.gen_range(0..6) {
                0 => {
                    pos.insert(r.clone());
                }
                1 => {
                    neg.insert(r.clone());
                }
                _ => {}
            }
        }
        ca.push(CanAssignRule::new(
            admin.clone(),
            Precondition::new(pos, neg),
            names[target].clone(),
        ));
    }

    let mut revocable = names.clone();
    revocable.shuffle(&mut rng);
    let cr = revocable
        .into_iter()
        .take(rng.gen_range(0..=shape.max_cr))
        .map(|r| CanRevokeRule::new(admin.clone(), r))
        .collect();

    let mut edges = Vec::new();
    if shape.hierarchy && n > 1 && rng.gen_bool(0.3) {
        for _ in 0..rng.gen_range(1..=3) {
            let a = rng.gen_range(0..n - 1);
            let b = rng.gen_range(a + 1..n);
            edges.push((names[a].clone(), names[b].clone()));
        }
    }

    let ua = if shape.initial {
        names
            .iter()
            .filter(|_| rng.gen_bool(0.2))
            .map(|r| (u.clone(), r.clone()))
            .collect()
    } else {
        Vec::new()
    };

    let target = names[rng.gen_range(0..n)].clone();
    let mut roles = vec![admin.clone()];
    roles.extend(names);
    Policy {
        roles,
        users: vec![u.clone()],
        ua,
        ca,
        cr,
        hierarchy: RoleHierarchy::new(edges),
        admin_roles: vec![admin],
        queries: vec![SafetyQuery::new(u, target)],
    }
}

/// Drops `¬{div}-Junior@{branch}` from the `{div}-Clerk@{branch}` rule whose
/// other positives are the Asst and Special roles.
pub fn drop_junior_from_clerk_row(policy: &mut Policy, div: &str, branch: usize) {
    let at = |p: &str| role(&format!("{div}{p}@{branch}"));
    let positives: BTreeSet<RoleId> = [at(""), at("-Asst"), at("-Special")].into_iter().collect();
    let rule = policy
        .ca
        .iter_mut()
        .find(|r| r.target == at("-Clerk") && r.pre.positive == positives)
        .expect("clerk row present");
    assert!(rule.pre.negative.remove(&at("-Junior")));
}
