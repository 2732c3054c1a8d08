//! Compositional reachability.
//!
//! Split the roles into N, the roles that occur in some negative
//! precondition, and P, all others. Holding a P role never disables a rule,
//! so a run never needs to give one up. The engine therefore tracks the P
//! roles acquired so far as a growing set and explores N roles separately.
//!
//! N roles are grouped into components: a rule that targets an N role links
//! it to every N literal of its precondition. Given the acquired P roles,
//! each component evolves independently of the others. Rules targeting P
//! roles may mix literals from several components; such a rule can fire iff
//! each of those components can reach a state meeting its share of the
//! literals, because the components can be steered one after the other.
//!
//! The argument needs every component to return to its start state from any
//! state it reaches, and needs N to stay out of the hierarchy. The engine
//! checks these sufficient conditions and refuses the instance otherwise:
//! - no initially held role is in N,
//! - every N role has a can_revoke rule,
//! - no hierarchy edge touches an N role.
//!
//! The acquired set is grown to a fixpoint. The witness replays only the
//! acquisitions the goal depends on, steering each component with a local
//! shortest path; it is valid but not necessarily globally shortest.

use std::collections::BTreeSet;

use indexmap::IndexSet;

use super::bits::{self, Bits};
use super::indexed::Indexed;
use super::{Outcome, SearchLimits, Verdict, Witness};

struct Component {
    mask: Bits,
    assigns: Vec<usize>,
    revokes: Vec<usize>,
}

struct Split {
    /// N as a mask.
    n: Bits,
    /// Per assign rule: positive P literals.
    pos_p: Vec<Bits>,
    /// Per assign rule: positive N literals.
    pos_n: Vec<Bits>,
    components: Vec<Component>,
    /// Component of each N role.
    comp_of: Vec<Option<usize>>,
    /// Assign rules targeting P roles, with the components they touch.
    p_rules: Vec<(usize, Vec<usize>)>,
}

struct Acquisition {
    role: usize,
    rule: usize,
    /// P-authorized roles when the rule was found enabled.
    snapshot: Bits,
}

/// Local BFS result: visited states in discovery order with back-pointers.
struct Local {
    states: IndexSet<Bits>,
    parents: Vec<(u32, u32)>,
    found: Option<usize>,
    truncated: bool,
}

impl Local {
    fn path(&self, mut id: usize) -> Vec<usize> {
        let mut moves = Vec::new();
        while id != 0 {
            let (parent, mv) = self.parents[id];
            moves.push(mv as usize);
            id = parent as usize;
        }
        moves.reverse();
        moves
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn split(inst: &Indexed) -> Result<Split, String> {
    let mut n = bits::empty(inst.words);
    for rule in &inst.assigns {
        bits::union_with(&mut n, &rule.neg);
    }
    if let Some(r) = bits::ones(&bits::intersect(&inst.initial, &n)).next() {
        return Err(format!(
            "{} is initially held and used negatively",
            inst.roles[r]
        ));
    }
    // a role nothing assigns stays unheld, so it need not be revocable
    let mut revocable = bits::empty(inst.words);
    for rule in &inst.revokes {
        bits::set(&mut revocable, rule.target);
    }
    let mut assignable = bits::empty(inst.words);
    for rule in &inst.assigns {
        bits::set(&mut assignable, rule.target);
    }
    let stuck = bits::intersect(&bits::minus(&n, &revocable), &assignable);
    if let Some(r) = bits::ones(&stuck).next() {
        return Err(format!(
            "{} is used negatively but cannot be revoked",
            inst.roles[r]
        ));
    }
    if let Some(closure) = &inst.closure {
        for (r, below) in closure.iter().enumerate() {
            let mut strict = below.clone();
            bits::clear(&mut strict, r);
            if !bits::is_zero(&strict) && (bits::has(&n, r) || !bits::disjoint(&strict, &n)) {
                return Err(format!(
                    "hierarchy edges below {} touch a role used negatively",
                    inst.roles[r]
                ));
            }
        }
    }

    let role_count = inst.roles.len();
    let mut parent: Vec<usize> = (0..role_count).collect();
    for rule in &inst.assigns {
        if !bits::has(&n, rule.target) {
            continue;
        }
        let literals = bits::intersect(&n, &rule.pos);
        for lit in bits::ones(&literals).chain(bits::ones(&rule.neg)) {
            let (a, b) = (find(&mut parent, rule.target), find(&mut parent, lit));
            parent[a] = b;
        }
    }
    let mut comp_of = vec![None; role_count];
    let mut components: Vec<Component> = Vec::new();
    let mut root_comp = vec![usize::MAX; role_count];
    for r in bits::ones(&n) {
        let root = find(&mut parent, r);
        if root_comp[root] == usize::MAX {
            root_comp[root] = components.len();
            components.push(Component {
                mask: bits::empty(inst.words),
                assigns: Vec::new(),
                revokes: Vec::new(),
            });
        }
        let c = root_comp[root];
        bits::set(&mut components[c].mask, r);
        comp_of[r] = Some(c);
    }

    let mut p_rules = Vec::new();
    for (i, rule) in inst.assigns.iter().enumerate() {
        match comp_of[rule.target] {
            Some(c) => components[c].assigns.push(i),
            None => {
                let touched = components
                    .iter()
                    .enumerate()
                    .filter(|(_, comp)| {
                        !bits::disjoint(&comp.mask, &rule.pos)
                            || !bits::disjoint(&comp.mask, &rule.neg)
                    })
                    .map(|(c, _)| c)
                    .collect();
                p_rules.push((i, touched));
            }
        }
    }
    for (j, rule) in inst.revokes.iter().enumerate() {
        if let Some(c) = comp_of[rule.target] {
            components[c].revokes.push(j);
        }
    }

    Ok(Split {
        pos_p: inst
            .assigns
            .iter()
            .map(|r| bits::minus(&r.pos, &n))
            .collect(),
        pos_n: inst
            .assigns
            .iter()
            .map(|r| bits::intersect(&r.pos, &n))
            .collect(),
        n,
        components,
        comp_of,
        p_rules,
    })
}

impl Split {
    /// Does component state `state` meet rule `rule`'s literals inside `c`?
    fn meets(&self, inst: &Indexed, rule: usize, c: usize, state: &[u64]) -> bool {
        let mask = &self.components[c].mask;
        bits::subset(&bits::intersect(&self.pos_n[rule], mask), state)
            && bits::disjoint(&inst.assigns[rule].neg, state)
    }

    /// BFS inside component `c` with the P roles in `auth_p` available.
    fn explore(
        &self,
        inst: &Indexed,
        c: usize,
        auth_p: &[u64],
        start: Bits,
        goal: &dyn Fn(&[u64]) -> bool,
        budget: &mut usize,
    ) -> Local {
        let comp = &self.components[c];
        if *budget == 0 {
            return Local {
                states: IndexSet::new(),
                parents: Vec::new(),
                found: None,
                truncated: true,
            };
        }
        *budget -= 1;
        let mut local = Local {
            states: IndexSet::from([start]),
            parents: vec![(0, 0)],
            found: None,
            truncated: false,
        };
        if goal(&local.states[0]) {
            local.found = Some(0);
            return local;
        }
        let offset = inst.assigns.len();
        let mut next = 0;
        while next < local.states.len() {
            let id = next;
            next += 1;
            let state = local.states[id].clone();
            let assigns = comp.assigns.iter().filter_map(|&i| {
                let rule = &inst.assigns[i];
                (!bits::has(&state, rule.target)
                    && bits::subset(&self.pos_p[i], auth_p)
                    && bits::subset(&self.pos_n[i], &state)
                    && bits::disjoint(&rule.neg, &state))
                .then(|| {
                    let mut s = state.clone();
                    bits::set(&mut s, rule.target);
                    (i, s)
                })
            });
            let revokes = comp.revokes.iter().filter_map(|&j| {
                let target = inst.revokes[j].target;
                bits::has(&state, target).then(|| {
                    let mut s = state.clone();
                    bits::clear(&mut s, target);
                    (offset + j, s)
                })
            });
            for (mv, succ) in assigns.chain(revokes) {
                if local.states.contains(&succ) {
                    continue;
                }
                if *budget == 0 {
                    local.truncated = true;
                    return local;
                }
                *budget -= 1;
                let hit = goal(&succ);
                let (sid, _) = local.states.insert_full(succ);
                local.parents.push((id as u32, mv as u32));
                if hit {
                    local.found = Some(sid);
                    return local;
                }
            }
        }
        local
    }
}

pub(crate) fn search(inst: &Indexed, limits: SearchLimits) -> Result<Verdict, String> {
    let split = split(inst)?;
    let verdict = |outcome, explored, exhausted| Verdict {
        outcome,
        states_explored: explored,
        exhausted,
        sliced_role_count: inst.roles.len(),
    };
    if inst.is_goal(&inst.initial) {
        return Ok(verdict(Outcome::Reachable(Witness::default()), 1, false));
    }

    let mut budget = limits.max_states.unwrap_or(usize::MAX).saturating_sub(1);
    let mut explored = 1usize;
    let zero = bits::empty(inst.words);
    let target_comp = split.comp_of[inst.target];

    let mut acquired = inst.initial.clone();
    let mut auth_p = inst.authorized(&acquired);
    let mut acquisitions: Vec<Acquisition> = Vec::new();

    loop {
        let mut reach_sets = Vec::with_capacity(split.components.len());
        for c in 0..split.components.len() {
            let local = split.explore(inst, c, &auth_p, zero.clone(), &|_| false, &mut budget);
            explored += local.states.len();
            if local.truncated {
                return Ok(verdict(Outcome::Unknown, explored, false));
            }
            reach_sets.push(local.states);
        }

        if let Some(c) = target_comp {
            if reach_sets[c].iter().any(|s| bits::has(s, inst.target)) {
                let witness = build_witness(inst, &split, &acquisitions, &auth_p);
                return Ok(verdict(Outcome::Reachable(witness), explored, false));
            }
        }

        let snapshot = auth_p.clone();
        let mut changed = false;
        for (rule, touched) in &split.p_rules {
            let target = inst.assigns[*rule].target;
            if bits::has(&auth_p, target) || !bits::subset(&split.pos_p[*rule], &snapshot) {
                continue;
            }
            let enabled = touched
                .iter()
                .all(|&c| reach_sets[c].iter().any(|s| split.meets(inst, *rule, c, s)));
            if enabled {
                bits::set(&mut acquired, target);
                auth_p = inst.authorized(&acquired);
                acquisitions.push(Acquisition {
                    role: target,
                    rule: *rule,
                    snapshot: snapshot.clone(),
                });
                changed = true;
            }
        }

        if target_comp.is_none() && bits::has(&auth_p, inst.target) {
            let witness = build_witness(inst, &split, &acquisitions, &auth_p);
            return Ok(verdict(Outcome::Reachable(witness), explored, false));
        }
        if !changed {
            return Ok(verdict(Outcome::Unreachable, explored, true));
        }
    }
}

/// Acquisition that first makes `role` P-authorized; `None` if held from
/// the start.
fn holder(inst: &Indexed, acquisitions: &[Acquisition], role: usize) -> Option<usize> {
    let covers = |r: usize| match &inst.closure {
        None => r == role,
        Some(closure) => bits::has(&closure[r], role),
    };
    if bits::ones(&inst.initial).any(covers) {
        return None;
    }
    acquisitions.iter().position(|a| covers(a.role))
}

fn build_witness(
    inst: &Indexed,
    split: &Split,
    acquisitions: &[Acquisition],
    final_auth_p: &[u64],
) -> Witness {
    let zero = bits::empty(inst.words);
    let mut unlimited = usize::MAX;
    let mut needed: BTreeSet<usize> = BTreeSet::new();
    let mut work: Vec<usize> = Vec::new();
    let demand = |deps: &Bits, needed: &mut BTreeSet<usize>, work: &mut Vec<usize>| {
        for lit in bits::ones(deps) {
            if let Some(k) = holder(inst, acquisitions, lit) {
                if needed.insert(k) {
                    work.push(k);
                }
            }
        }
    };
    let path_deps = |local: &Local, id: usize| {
        let mut deps = bits::empty(inst.words);
        for mv in local.path(id) {
            if mv < inst.assigns.len() {
                bits::union_with(&mut deps, &split.pos_p[mv]);
            }
        }
        deps
    };

    let target_comp = split.comp_of[inst.target];
    match target_comp {
        Some(c) => {
            let local = split.explore(
                inst,
                c,
                final_auth_p,
                zero.clone(),
                &|s| bits::has(s, inst.target),
                &mut unlimited,
            );
            let found = local.found.expect("target component reaches the target");
            demand(&path_deps(&local, found), &mut needed, &mut work);
        }
        None => {
            let mut goal = bits::empty(inst.words);
            bits::set(&mut goal, inst.target);
            demand(&goal, &mut needed, &mut work);
        }
    }
    while let Some(k) = work.pop() {
        let acq = &acquisitions[k];
        demand(&split.pos_p[acq.rule], &mut needed, &mut work);
        let touched = &split
            .p_rules
            .iter()
            .find(|(r, _)| *r == acq.rule)
            .expect("P rule")
            .1;
        for &c in touched {
            let local = split.explore(
                inst,
                c,
                &acq.snapshot,
                zero.clone(),
                &|s| split.meets(inst, acq.rule, c, s),
                &mut unlimited,
            );
            let found = local.found.expect("acquisition was enabled");
            demand(&path_deps(&local, found), &mut needed, &mut work);
        }
    }

    // replay the needed acquisitions in order, steering components locally
    let mut current = inst.initial.clone();
    let mut steps = Vec::new();
    let steer =
        |current: &mut Bits, steps: &mut Vec<_>, c: usize, goal: &dyn Fn(&[u64]) -> bool| {
            let auth_p = inst.authorized(&bits::minus(current, &split.n));
            let start = bits::intersect(current, &split.components[c].mask);
            let mut unlimited = usize::MAX;
            let local = split.explore(inst, c, &auth_p, start, goal, &mut unlimited);
            let found = local.found.expect("component can be steered");
            for mv in local.path(found) {
                if mv < inst.assigns.len() {
                    bits::set(current, inst.assigns[mv].target);
                } else {
                    bits::clear(current, inst.revokes[mv - inst.assigns.len()].target);
                }
                steps.push(inst.action(mv));
            }
        };
    for &k in &needed {
        let acq = &acquisitions[k];
        let touched = &split
            .p_rules
            .iter()
            .find(|(r, _)| *r == acq.rule)
            .expect("P rule")
            .1;
        for &c in touched {
            steer(&mut current, &mut steps, c, &|s| {
                split.meets(inst, acq.rule, c, s)
            });
        }
        bits::set(&mut current, acq.role);
        steps.push(inst.action(acq.rule));
    }
    if let Some(c) = target_comp {
        steer(&mut current, &mut steps, c, &|s| bits::has(s, inst.target));
    }
    Witness { steps }
}
