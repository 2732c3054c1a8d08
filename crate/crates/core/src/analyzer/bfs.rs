//! FIFO breadth-first search over direct-assignment bitsets.
//!
//! Discovery order doubles as the queue: states are numbered as they are
//! inserted into the visited set, and the frontier is the suffix of ids not
//! yet expanded.

use indexmap::IndexSet;

use super::bits::Bits;
use super::indexed::Indexed;
use super::{Outcome, SearchLimits, Verdict, Witness};

const ROOT: u32 = u32::MAX;

struct Tree {
    /// (parent id, move) per state id.
    parents: Vec<(u32, u32)>,
    depth: Vec<u32>,
}

impl Tree {
    fn witness(&self, inst: &Indexed, mut id: usize) -> Witness {
        let mut steps = Vec::with_capacity(self.depth[id] as usize);
        while self.parents[id].0 != ROOT {
            let (parent, mv) = self.parents[id];
            steps.push(inst.action(mv as usize));
            id = parent as usize;
        }
        steps.reverse();
        Witness { steps }
    }
}

pub(crate) fn search(inst: &Indexed, limits: SearchLimits) -> Verdict {
    let verdict = |outcome, explored, exhausted| Verdict {
        outcome,
        states_explored: explored,
        exhausted,
        sliced_role_count: inst.roles.len(),
    };

    let mut seen: IndexSet<Bits> = IndexSet::new();
    seen.insert(inst.initial.clone());
    if inst.is_goal(&inst.initial) {
        return verdict(Outcome::Reachable(Witness::default()), 1, false);
    }
    let mut tree = Tree {
        parents: vec![(ROOT, 0)],
        depth: vec![0],
    };
    let max_states = limits.max_states.unwrap_or(usize::MAX);
    let max_depth = limits
        .max_depth
        .map_or(u32::MAX, |d| d.min(u32::MAX as usize) as u32);
    let mut truncated = false;

    let mut next = 0;
    'search: while next < seen.len() {
        let id = next;
        next += 1;
        let state = seen[id].clone();
        let depth = tree.depth[id];
        if depth >= max_depth {
            if inst.moves(&state).any(|(_, s)| !seen.contains(&s)) {
                truncated = true;
            }
            continue;
        }
        for (mv, succ) in inst.moves(&state) {
            if seen.contains(&succ) {
                continue;
            }
            if seen.len() >= max_states {
                truncated = true;
                break 'search;
            }
            let goal = inst.is_goal(&succ);
            let (succ_id, _) = seen.insert_full(succ);
            tree.parents.push((id as u32, mv as u32));
            tree.depth.push(depth + 1);
            if goal {
                let witness = tree.witness(inst, succ_id);
                return verdict(Outcome::Reachable(witness), seen.len(), false);
            }
        }
    }

    if truncated {
        verdict(Outcome::Unknown, seen.len(), false)
    } else {
        verdict(Outcome::Unreachable, seen.len(), true)
    }
}
