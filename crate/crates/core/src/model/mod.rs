//! ARBAC domain types.
//!
//! A [`Policy`] is a plain container: it keeps declarations in the order
//! they were written (duplicates included) so that [`validate`] can report
//! them and the text serializer can reproduce the source ordering.
//! Preconditions are sets, so two rules that differ only in literal order
//! compare equal.

mod semantics;
mod validate;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use semantics::{
    applicable_actions, apply_action, apply_assign, apply_revoke, authorized_roles, satisfies,
    Action, ActionError, ActionKind,
};
pub use validate::{validate, Diagnostic, DiagnosticKind, Severity};

/// The only word of the text format that can never be used as a name.
pub const RESERVED_WORD: &str = "TRUE";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid identifier {0:?}: expected [A-Za-z_][A-Za-z0-9_@-]* and not `TRUE`")]
pub struct InvalidIdentifier(pub String);

/// Checks the identifier grammar shared by roles and users.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    s != RESERVED_WORD && chars.all(is_identifier_continue)
}

pub(crate) fn is_identifier_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '@')
}

macro_rules! identifier_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(String);

        impl $name {
            pub fn new(name: impl Into<String>) -> Result<Self, InvalidIdentifier> {
                let name = name.into();
                if is_identifier(&name) {
                    Ok(Self(name))
                } else {
                    Err(InvalidIdentifier(name))
                }
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl FromStr for $name {
            type Err = InvalidIdentifier;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                Self::new(s)
            }
        }

        impl AsRef<str> for $name {
            fn as_ref(&self) -> &str {
                &self.0
            }
        }
    };
}

identifier_type!(
    /// Role name. Identity is exact, case-sensitive string equality.
    RoleId
);
identifier_type!(
    /// User name.
    UserId
);

/// Senior-to-junior edges. Holding a senior role confers its juniors.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RoleHierarchy {
    pub edges: Vec<(RoleId, RoleId)>,
}

impl RoleHierarchy {
    pub fn new(edges: Vec<(RoleId, RoleId)>) -> Self {
        Self { edges }
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Direct juniors of `role`, in edge order.
    pub fn juniors<'a>(&'a self, role: &'a RoleId) -> impl Iterator<Item = &'a RoleId> + 'a {
        self.edges
            .iter()
            .filter(move |(senior, _)| senior == role)
            .map(|(_, junior)| junior)
    }
}

/// Conjunction of positive and negative role literals.
///
/// Both sets empty is the unconditional precondition, written `TRUE`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Precondition {
    pub positive: BTreeSet<RoleId>,
    pub negative: BTreeSet<RoleId>,
}

impl Precondition {
    pub fn always() -> Self {
        Self::default()
    }

    pub fn new(
        positive: impl IntoIterator<Item = RoleId>,
        negative: impl IntoIterator<Item = RoleId>,
    ) -> Self {
        Self {
            positive: positive.into_iter().collect(),
            negative: negative.into_iter().collect(),
        }
    }

    pub fn is_unconditional(&self) -> bool {
        self.positive.is_empty() && self.negative.is_empty()
    }

    /// Both positive and negative literals present.
    pub fn is_mixed(&self) -> bool {
        !self.positive.is_empty() && !self.negative.is_empty()
    }

    pub fn mentions(&self, role: &RoleId) -> bool {
        self.positive.contains(role) || self.negative.contains(role)
    }

    pub fn roles(&self) -> impl Iterator<Item = &RoleId> {
        self.positive.iter().chain(self.negative.iter())
    }
}

impl fmt::Display for Precondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_unconditional() {
            return f.write_str(RESERVED_WORD);
        }
        let mut first = true;
        for (sign, role) in self
            .positive
            .iter()
            .map(|r| ("", r))
            .chain(self.negative.iter().map(|r| ("-", r)))
        {
            if !first {
                f.write_str("&")?;
            }
            first = false;
            write!(f, "{sign}{role}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CanAssignRule {
    pub admin: RoleId,
    pub pre: Precondition,
    pub target: RoleId,
}

impl CanAssignRule {
    pub fn new(admin: RoleId, pre: Precondition, target: RoleId) -> Self {
        Self { admin, pre, target }
    }
}

impl fmt::Display for CanAssignRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}, {}, {}>", self.admin, self.pre, self.target)
    }
}

/// Unconditional permission for `admin` to revoke `target`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CanRevokeRule {
    pub admin: RoleId,
    pub target: RoleId,
}

impl CanRevokeRule {
    pub fn new(admin: RoleId, target: RoleId) -> Self {
        Self { admin, target }
    }
}

impl fmt::Display for CanRevokeRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}, {}>", self.admin, self.target)
    }
}

/// Can `user` ever become authorized for `target`?
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SafetyQuery {
    pub user: UserId,
    pub target: RoleId,
}

impl SafetyQuery {
    pub fn new(user: UserId, target: RoleId) -> Self {
        Self { user, target }
    }
}

impl fmt::Display for SafetyQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}, {}>", self.user, self.target)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Policy {
    pub roles: Vec<RoleId>,
    pub users: Vec<UserId>,
    pub ua: Vec<(UserId, RoleId)>,
    pub ca: Vec<CanAssignRule>,
    pub cr: Vec<CanRevokeRule>,
    pub hierarchy: RoleHierarchy,
    pub admin_roles: Vec<RoleId>,
    pub queries: Vec<SafetyQuery>,
}

impl Policy {
    pub fn declares_role(&self, role: &RoleId) -> bool {
        self.roles.contains(role)
    }

    pub fn declares_user(&self, user: &UserId) -> bool {
        self.users.contains(user)
    }

    /// Direct initial assignments of `user`.
    pub fn initial_state(&self, user: &UserId) -> UserState {
        UserState::new(
            self.ua
                .iter()
                .filter(|(u, _)| u == user)
                .map(|(_, r)| r.clone()),
        )
    }
}

/// Roles directly assigned to the analyzed user.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UserState {
    pub assigned: BTreeSet<RoleId>,
}

impl UserState {
    pub fn new(assigned: impl IntoIterator<Item = RoleId>) -> Self {
        Self {
            assigned: assigned.into_iter().collect(),
        }
    }

    pub fn holds(&self, role: &RoleId) -> bool {
        self.assigned.contains(role)
    }
}
