//! Safety-query decision procedures.
//!
//! Three engines share one verdict type:
//!
//! - [`reach`]: breadth-first search over the analyzed user's role sets,
//!   optionally on the relevance [`slice`] of the policy. Witnesses are
//!   shortest, ties broken by rule order.
//! - the modular engine ([`Engine::Modular`]): a compositional fixpoint for
//!   policies where every role used in a negative precondition is revocable
//!   and initially unheld. It scales to instances whose product state space
//!   is far beyond BFS, such as the instrumented 18-branch bank. Its
//!   witnesses are replayable but not necessarily shortest.
//! - [`oracle_reach`]: a deliberately naive exhaustive search over the core
//!   model operations, used for differential testing.
//!
//! Every `Reachable` verdict carries a witness that [`replay`] certifies.

mod bfs;
mod bits;
mod indexed;
mod modular;
mod oracle;
mod slice;

use std::fmt;

use thiserror::Error;

use crate::model::{
    apply_action, authorized_roles, validate, Action, Diagnostic, Policy, SafetyQuery,
};

pub use oracle::{oracle_reach, oracle_reach_with_cap, OracleError, DEFAULT_ORACLE_CAP};
pub use slice::slice;

use indexed::Indexed;

/// One witness step. `rule_index` always refers to the unsliced policy.
pub type ActionStep = Action;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Witness {
    pub steps: Vec<ActionStep>,
}

impl Witness {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Reachable(Witness),
    Unreachable,
    /// A search limit cut the exploration short.
    Unknown,
}

impl Outcome {
    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Reachable(_) => "reachable",
            Outcome::Unreachable => "unreachable",
            Outcome::Unknown => "unknown",
        }
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Outcome::Reachable(w) => Some(w),
            _ => None,
        }
    }

    /// Equal up to the witness.
    pub fn same_answer(&self, other: &Outcome) -> bool {
        std::mem::discriminant(self) == std::mem::discriminant(other)
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub outcome: Outcome,
    pub states_explored: usize,
    /// The whole reachable space was explored.
    pub exhausted: bool,
    /// Roles of the instance actually searched.
    pub sliced_role_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SearchLimits {
    pub max_states: Option<usize>,
    pub max_depth: Option<usize>,
}

impl SearchLimits {
    pub fn unlimited() -> Self {
        Self::default()
    }

    pub fn states(max_states: usize) -> Self {
        Self {
            max_states: Some(max_states),
            max_depth: None,
        }
    }

    pub fn with_max_depth(mut self, depth: usize) -> Self {
        self.max_depth = Some(depth);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Engine {
    #[default]
    Bfs,
    Modular,
    /// Modular when applicable, BFS otherwise.
    Auto,
}

impl Engine {
    pub fn label(self) -> &'static str {
        match self {
            Engine::Bfs => "bfs",
            Engine::Modular => "modular",
            Engine::Auto => "auto",
        }
    }
}

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("query {query} names an undeclared {what}")]
    InvalidQuery {
        query: SafetyQuery,
        what: &'static str,
    },
    #[error("policy is not well-formed: {}", .0[0])]
    InvalidPolicy(Vec<Diagnostic>),
    #[error("modular engine not applicable: {0}")]
    ModularNotApplicable(String),
}

pub(crate) fn check_inputs(policy: &Policy, query: &SafetyQuery) -> Result<(), AnalysisError> {
    let errors: Vec<Diagnostic> = validate(policy)
        .into_iter()
        .filter(Diagnostic::is_error)
        .collect();
    if !errors.is_empty() {
        return Err(AnalysisError::InvalidPolicy(errors));
    }
    let missing = if !policy.declares_user(&query.user) {
        Some("user")
    } else if !policy.declares_role(&query.target) {
        Some("role")
    } else {
        None
    };
    match missing {
        Some(what) => Err(AnalysisError::InvalidQuery {
            query: query.clone(),
            what,
        }),
        None => Ok(()),
    }
}

fn instance(policy: &Policy, query: &SafetyQuery, use_slicing: bool) -> Indexed {
    if use_slicing {
        let sliced = slice::slice_with_origins(policy, query);
        Indexed::new(&sliced.policy, query, &sliced.ca_origin, &sliced.cr_origin)
    } else {
        let ca: Vec<usize> = (0..policy.ca.len()).collect();
        let cr: Vec<usize> = (0..policy.cr.len()).collect();
        Indexed::new(policy, query, &ca, &cr)
    }
}

/// Breadth-first reachability. See the module docs.
pub fn reach(
    policy: &Policy,
    query: &SafetyQuery,
    limits: SearchLimits,
    use_slicing: bool,
) -> Result<Verdict, AnalysisError> {
    check_inputs(policy, query)?;
    Ok(bfs::search(&instance(policy, query, use_slicing), limits))
}

/// Runs the requested engine and reports which one produced the verdict.
/// The modular engine honours `max_states` only.
pub fn analyze(
    policy: &Policy,
    query: &SafetyQuery,
    limits: SearchLimits,
    use_slicing: bool,
    engine: Engine,
) -> Result<(Engine, Verdict), AnalysisError> {
    check_inputs(policy, query)?;
    let inst = instance(policy, query, use_slicing);
    match engine {
        Engine::Bfs => Ok((Engine::Bfs, bfs::search(&inst, limits))),
        Engine::Modular => modular::search(&inst, limits)
            .map(|v| (Engine::Modular, v))
            .map_err(AnalysisError::ModularNotApplicable),
        Engine::Auto => Ok(match modular::search(&inst, limits) {
            Ok(v) => (Engine::Modular, v),
            Err(_) => (Engine::Bfs, bfs::search(&inst, limits)),
        }),
    }
}

/// True iff `witness` replays legally from the user's initial assignments
/// and ends with the target authorized.
pub fn replay(policy: &Policy, query: &SafetyQuery, witness: &Witness) -> bool {
    let mut state = policy.initial_state(&query.user);
    for step in &witness.steps {
        match apply_action(policy, &state, step) {
            Ok(next) => state = next,
            Err(_) => return false,
        }
    }
    authorized_roles(&state, &policy.hierarchy).contains(&query.target)
}
