//! Administrative RBAC policy toolkit.
//!
//! - [`model`]: roles, rules, policies and the semantics of assignment and
//!   revocation.
//! - [`text`]: the policy text format.
//! - [`sop`]: separation-of-privilege constraints compiled into rules.
//! - [`bank`]: generator for the multi-branch bank case study.
//! - [`analyzer`]: safety-query engines with replayable witnesses.

pub mod analyzer;
pub mod bank;
pub mod model;
pub mod sop;
pub mod text;

pub use analyzer::{
    analyze, oracle_reach, reach, replay, slice, Engine, Outcome, SearchLimits, Verdict, Witness,
};
pub use model::{
    CanAssignRule, CanRevokeRule, Policy, Precondition, RoleHierarchy, RoleId, SafetyQuery, UserId,
    UserState,
};
pub use text::{parse_policy, serialize_policy};
