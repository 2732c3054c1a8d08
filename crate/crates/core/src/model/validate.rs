use std::collections::{HashMap, HashSet};
use std::fmt;

use petgraph::algo::tarjan_scc;
use petgraph::graphmap::DiGraphMap;

use super::{Policy, RoleId, UserId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    /// Harmless to the semantics; reported for tooling.
    Note,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagnosticKind {
    DuplicateRole,
    DuplicateUser,
    UndeclaredRole,
    UndeclaredUser,
    LiteralOverlap,
    TargetInPrecondition,
    HierarchyCycle,
    AdminNotDeclared,
    AdminRoleTargeted,
    DuplicateRule,
    DuplicateAssignment,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub kind: DiagnosticKind,
    /// Where in the policy, e.g. `CA#3` or `RH`.
    pub location: String,
    pub message: String,
}

impl Diagnostic {
    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let level = match self.severity {
            Severity::Note => "note",
            Severity::Error => "error",
        };
        write!(f, "{level}: {}: {}", self.location, self.message)
    }
}

struct Checker<'p> {
    policy: &'p Policy,
    roles: HashSet<&'p RoleId>,
    users: HashSet<&'p UserId>,
    out: Vec<Diagnostic>,
}

impl<'p> Checker<'p> {
    fn push(&mut self, severity: Severity, kind: DiagnosticKind, location: &str, message: String) {
        self.out.push(Diagnostic {
            severity,
            kind,
            location: location.to_owned(),
            message,
        });
    }

    fn role(&mut self, role: &RoleId, location: &str) {
        if !self.roles.contains(role) {
            self.push(
                Severity::Error,
                DiagnosticKind::UndeclaredRole,
                location,
                format!("role {role} is not declared"),
            );
        }
    }

    fn user(&mut self, user: &UserId, location: &str) {
        if !self.users.contains(user) {
            self.push(
                Severity::Error,
                DiagnosticKind::UndeclaredUser,
                location,
                format!("user {user} is not declared"),
            );
        }
    }

    fn admin(&mut self, admin: &RoleId, location: &str) {
        self.role(admin, location);
        if !self.policy.admin_roles.contains(admin) {
            self.push(
                Severity::Error,
                DiagnosticKind::AdminNotDeclared,
                location,
                format!("{admin} administers a rule but is not listed in ADMIN"),
            );
        }
    }

    fn target(&mut self, target: &RoleId, location: &str) {
        self.role(target, location);
        if self.policy.admin_roles.contains(target) {
            self.push(
                Severity::Error,
                DiagnosticKind::AdminRoleTargeted,
                location,
                format!("administrative role {target} cannot be the target of a rule"),
            );
        }
    }

    fn declarations(&mut self) {
        let mut seen = HashSet::new();
        for role in &self.policy.roles {
            if !seen.insert(role) {
                self.push(
                    Severity::Error,
                    DiagnosticKind::DuplicateRole,
                    "Roles",
                    format!("role {role} is declared more than once"),
                );
            }
        }
        let mut seen = HashSet::new();
        for user in &self.policy.users {
            if !seen.insert(user) {
                self.push(
                    Severity::Error,
                    DiagnosticKind::DuplicateUser,
                    "Users",
                    format!("user {user} is declared more than once"),
                );
            }
        }
    }

    fn assignments(&mut self) {
        let policy = self.policy;
        let mut seen = HashSet::new();
        for (i, (user, role)) in policy.ua.iter().enumerate() {
            let loc = format!("UA#{i}");
            self.user(user, &loc);
            self.role(role, &loc);
            if !seen.insert((user, role)) {
                self.push(
                    Severity::Note,
                    DiagnosticKind::DuplicateAssignment,
                    &loc,
                    format!("<{user}, {role}> repeats an earlier assignment"),
                );
            }
        }
    }

    fn rules(&mut self) {
        let policy = self.policy;
        let mut first_seen = HashMap::new();
        for (i, rule) in policy.ca.iter().enumerate() {
            let loc = format!("CA#{i}");
            self.admin(&rule.admin, &loc);
            self.target(&rule.target, &loc);
            for r in rule.pre.roles() {
                self.role(r, &loc);
            }
            let overlap: Vec<String> = rule
                .pre
                .positive
                .intersection(&rule.pre.negative)
                .map(ToString::to_string)
                .collect();
            if !overlap.is_empty() {
                self.push(
                    Severity::Error,
                    DiagnosticKind::LiteralOverlap,
                    &loc,
                    format!(
                        "{rule}: {} required both positively and negatively",
                        overlap.join(", ")
                    ),
                );
            }
            if rule.pre.mentions(&rule.target) {
                self.push(
                    Severity::Error,
                    DiagnosticKind::TargetInPrecondition,
                    &loc,
                    format!(
                        "{rule}: target {} appears in its own precondition",
                        rule.target
                    ),
                );
            }
            if let Some(first) = first_seen.insert(rule, i) {
                first_seen.insert(rule, first);
                self.push(
                    Severity::Note,
                    DiagnosticKind::DuplicateRule,
                    &loc,
                    format!("{rule} duplicates CA#{first}"),
                );
            }
        }

        let mut first_seen = HashMap::new();
        for (i, rule) in policy.cr.iter().enumerate() {
            let loc = format!("CR#{i}");
            self.admin(&rule.admin, &loc);
            self.target(&rule.target, &loc);
            if let Some(first) = first_seen.insert(rule, i) {
                first_seen.insert(rule, first);
                self.push(
                    Severity::Note,
                    DiagnosticKind::DuplicateRule,
                    &loc,
                    format!("{rule} duplicates CR#{first}"),
                );
            }
        }
    }

    fn hierarchy(&mut self) {
        let policy = self.policy;
        let mut graph = DiGraphMap::<&str, ()>::new();
        for (i, (senior, junior)) in policy.hierarchy.edges.iter().enumerate() {
            let loc = format!("RH#{i}");
            self.role(senior, &loc);
            self.role(junior, &loc);
            graph.add_edge(senior.as_str(), junior.as_str(), ());
        }
        let mut cycles: Vec<Vec<&str>> = tarjan_scc(&graph)
            .into_iter()
            .filter(|scc| scc.len() > 1 || graph.contains_edge(scc[0], scc[0]))
            .map(|mut scc| {
                scc.sort_unstable();
                scc
            })
            .collect();
        cycles.sort();
        for cycle in cycles {
            self.push(
                Severity::Error,
                DiagnosticKind::HierarchyCycle,
                "RH",
                format!("hierarchy cycle through {}", cycle.join(", ")),
            );
        }
    }

    fn admins_and_queries(&mut self) {
        let policy = self.policy;
        for admin in &policy.admin_roles {
            self.role(admin, "ADMIN");
        }
        for (i, query) in policy.queries.iter().enumerate() {
            let loc = format!("SPEC#{i}");
            self.user(&query.user, &loc);
            self.role(&query.target, &loc);
        }
    }
}

/// Reports every well-formedness violation. A policy is well-formed when no
/// diagnostic has [`Severity::Error`].
pub fn validate(policy: &Policy) -> Vec<Diagnostic> {
    let mut checker = Checker {
        policy,
        roles: policy.roles.iter().collect(),
        users: policy.users.iter().collect(),
        out: Vec::new(),
    };
    checker.declarations();
    checker.assignments();
    checker.rules();
    checker.hierarchy();
    checker.admins_and_queries();
    checker.out
}
