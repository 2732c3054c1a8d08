//! Generator for the multi-branch bank policy.
//!
//! Every branch has the same 33 roles: an `Employee` role and, for each of
//! the four business divisions, a division role, two managerial roles and
//! five non-managerial roles. Branch roles carry an `@i` suffix
//! (`FA-Clerk@3`). A single `Admin` role administers everything.
//!
//! Per branch and division the can_assign rules are:
//! - the SOP family for `<non-managerial roles, 3>` guarded by the division
//!   role (11 rules per target),
//! - one rule per managerial role: division role positive, all five
//!   non-managerial roles negative,
//! - a bootstrap `<Admin, Employee@i, FA@i>`,
//!
//! plus `<Admin, TRUE, Employee@i>` once per branch. Every branch role is
//! revocable.
//!
//! Query instrumentation adds `AnyFour_i` (holds four non-managerial roles
//! of one division in branch `i`) and the helper chain `Branch_i`, fed by
//! `AnyFour_i` or `Branch_{i+1}`, then target roles for the "any branch"
//! (`TargetQ1`) and "all branches" (`TargetQ2`) questions.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::model::{
    CanAssignRule, CanRevokeRule, Policy, Precondition, RoleId, SafetyQuery, UserId,
};
use crate::sop::{compile_sop, compile_sop_monitor, SopConstraint};

pub const ADMIN_ROLE: &str = "Admin";
pub const DEFAULT_ANALYSIS_USER: &str = "newUser";
pub const TARGET_Q1: &str = "TargetQ1";
pub const TARGET_Q2: &str = "TargetQ2";
/// Target of the corrected "all branches" encoding.
pub const TARGET_Q2_DIRECT: &str = "TargetQ2Direct";
/// Maximum non-managerial roles per division a user may hold.
pub const NON_MANAGERIAL_LIMIT: usize = 3;
pub const ROLES_PER_BRANCH: usize = 33;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Division {
    FinancialAnalyst,
    ShareTechnician,
    OfficeBanking,
    SupportECommerce,
}

impl Division {
    pub const ALL: [Division; 4] = [
        Division::FinancialAnalyst,
        Division::ShareTechnician,
        Division::OfficeBanking,
        Division::SupportECommerce,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Division::FinancialAnalyst => "FA",
            Division::ShareTechnician => "ST",
            Division::OfficeBanking => "OB",
            Division::SupportECommerce => "SE",
        }
    }
}

impl fmt::Display for Division {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Position {
    HeadOfDivision,
    GroupManager,
    Specialist,
    Assistant,
    Senior,
    Junior,
    Clerk,
}

impl Position {
    /// Declaration order within a division.
    pub const ALL: [Position; 7] = [
        Position::HeadOfDivision,
        Position::GroupManager,
        Position::Specialist,
        Position::Assistant,
        Position::Senior,
        Position::Junior,
        Position::Clerk,
    ];

    pub const MANAGERIAL: [Position; 2] = [Position::HeadOfDivision, Position::GroupManager];

    /// Order of the SOP role set; fixes rule emission order.
    pub const NON_MANAGERIAL: [Position; 5] = [
        Position::Assistant,
        Position::Specialist,
        Position::Senior,
        Position::Junior,
        Position::Clerk,
    ];

    pub fn suffix(self) -> &'static str {
        match self {
            Position::HeadOfDivision => "HOD",
            Position::GroupManager => "GM",
            Position::Specialist => "Special",
            Position::Assistant => "Asst",
            Position::Senior => "Senior",
            Position::Junior => "Junior",
            Position::Clerk => "Clerk",
        }
    }

    pub fn is_managerial(self) -> bool {
        Self::MANAGERIAL.contains(&self)
    }
}

fn named(name: String) -> RoleId {
    RoleId::new(name).expect("generated names follow the identifier grammar")
}

pub fn employee_role(branch: usize) -> RoleId {
    named(format!("Employee@{branch}"))
}

pub fn division_role(division: Division, branch: usize) -> RoleId {
    named(format!("{division}@{branch}"))
}

pub fn position_role(division: Division, position: Position, branch: usize) -> RoleId {
    named(format!("{division}-{}@{branch}", position.suffix()))
}

pub fn any_four_role(branch: usize) -> RoleId {
    named(format!("AnyFour_{branch}"))
}

pub fn branch_helper_role(branch: usize) -> RoleId {
    named(format!("Branch_{branch}"))
}

pub fn admin_role() -> RoleId {
    named(ADMIN_ROLE.to_owned())
}

/// The 33 roles of one branch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchRoleSet {
    pub branch: usize,
    pub employee: RoleId,
    pub divisions: Vec<DivisionRoles>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivisionRoles {
    pub division: Division,
    pub role: RoleId,
    pub managerial: [RoleId; 2],
    /// In SOP role-set order.
    pub non_managerial: [RoleId; 5],
}

impl DivisionRoles {
    fn new(division: Division, branch: usize) -> Self {
        Self {
            division,
            role: division_role(division, branch),
            managerial: Position::MANAGERIAL.map(|p| position_role(division, p, branch)),
            non_managerial: Position::NON_MANAGERIAL.map(|p| position_role(division, p, branch)),
        }
    }

    pub fn sop_constraint(&self) -> SopConstraint {
        SopConstraint::new(self.non_managerial.to_vec(), NON_MANAGERIAL_LIMIT)
            .expect("five distinct roles, limit 3")
    }
}

impl BranchRoleSet {
    pub fn new(branch: usize) -> Self {
        Self {
            branch,
            employee: employee_role(branch),
            divisions: Division::ALL
                .iter()
                .map(|&d| DivisionRoles::new(d, branch))
                .collect(),
        }
    }

    pub fn division(&self, division: Division) -> &DivisionRoles {
        &self.divisions[division as usize]
    }

    /// Position roles per division, then division roles, then `Employee`.
    pub fn roles(&self) -> Vec<RoleId> {
        let mut out: Vec<RoleId> = Division::ALL
            .iter()
            .flat_map(|&d| Position::ALL.map(|p| position_role(d, p, self.branch)))
            .collect();
        out.extend(self.divisions.iter().map(|d| d.role.clone()));
        out.push(self.employee.clone());
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Instrumentation {
    #[default]
    None,
    /// Four non-managerial roles of one division in some branch.
    Q1,
    /// The "all branches" question.
    Q2,
    Both,
}

impl Instrumentation {
    pub fn q1(self) -> bool {
        matches!(self, Instrumentation::Q1 | Instrumentation::Both)
    }

    pub fn q2(self) -> bool {
        matches!(self, Instrumentation::Q2 | Instrumentation::Both)
    }

    pub fn enabled(self) -> bool {
        self != Instrumentation::None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HierarchyMode {
    #[default]
    Flat,
    /// Every position role is senior to its division role, every division
    /// role is senior to `Employee`.
    Hierarchical,
}

/// How the "all branches" question is encoded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Q2Encoding {
    /// `<Admin, Branch_1 ∧ … ∧ Branch_B, TargetQ2>` over the helper chain.
    /// Because `Branch_i` follows from `Branch_{i+1}` alone, a violation in
    /// the last branch already satisfies the whole conjunction.
    #[default]
    Chain,
    /// `<Admin, AnyFour_1 ∧ … ∧ AnyFour_B, TargetQ2Direct>`, which really
    /// requires a violation in every branch.
    Direct,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BankConfig {
    pub branches: usize,
    pub instrumentation: Instrumentation,
    pub hierarchy: HierarchyMode,
    pub q2_encoding: Q2Encoding,
    pub analysis_user: UserId,
}

impl BankConfig {
    pub fn new(branches: usize) -> Self {
        Self {
            branches,
            instrumentation: Instrumentation::None,
            hierarchy: HierarchyMode::Flat,
            q2_encoding: Q2Encoding::Chain,
            analysis_user: UserId::new(DEFAULT_ANALYSIS_USER).expect("valid name"),
        }
    }

    pub fn with_instrumentation(mut self, instrumentation: Instrumentation) -> Self {
        self.instrumentation = instrumentation;
        self
    }

    pub fn with_hierarchy(mut self, hierarchy: HierarchyMode) -> Self {
        self.hierarchy = hierarchy;
        self
    }

    pub fn with_q2_encoding(mut self, encoding: Q2Encoding) -> Self {
        self.q2_encoding = encoding;
        self
    }

    pub fn q2_target(&self) -> RoleId {
        named(
            match self.q2_encoding {
                Q2Encoding::Chain => TARGET_Q2,
                Q2Encoding::Direct => TARGET_Q2_DIRECT,
            }
            .to_owned(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BankError {
    #[error("the bank needs at least one branch")]
    NoBranches,
}

pub fn generate_bank(config: &BankConfig) -> Result<Policy, BankError> {
    if config.branches == 0 {
        return Err(BankError::NoBranches);
    }
    let admin = admin_role();
    let admin_rule =
        |pre: Precondition, target: &RoleId| CanAssignRule::new(admin.clone(), pre, target.clone());
    let branches: Vec<BranchRoleSet> = (1..=config.branches).map(BranchRoleSet::new).collect();

    let mut policy = Policy {
        roles: vec![admin.clone()],
        users: vec![config.analysis_user.clone()],
        admin_roles: vec![admin.clone()],
        ..Policy::default()
    };

    for branch in &branches {
        let roles = branch.roles();
        policy.cr.extend(
            roles
                .iter()
                .map(|r| CanRevokeRule::new(admin.clone(), r.clone())),
        );
        policy.roles.extend(roles);

        policy
            .ca
            .push(admin_rule(Precondition::always(), &branch.employee));
        for division in &branch.divisions {
            policy.ca.push(admin_rule(
                Precondition::new([branch.employee.clone()], []),
                &division.role,
            ));
            let guard = BTreeSet::from([division.role.clone()]);
            let sop = compile_sop(&division.sop_constraint(), &guard, &admin)
                .expect("division role and Admin are outside the constraint");
            policy.ca.extend(sop.assign_rules);
            for manager in &division.managerial {
                policy.ca.push(admin_rule(
                    Precondition::new(
                        [division.role.clone()],
                        division.non_managerial.iter().cloned(),
                    ),
                    manager,
                ));
            }
            if config.hierarchy == HierarchyMode::Hierarchical {
                let edges = &mut policy.hierarchy.edges;
                for role in division.managerial.iter().chain(&division.non_managerial) {
                    edges.push((role.clone(), division.role.clone()));
                }
                edges.push((division.role.clone(), branch.employee.clone()));
            }
        }
    }

    if config.instrumentation.enabled() {
        instrument(config, &branches, &mut policy);
    }
    Ok(policy)
}

/// One division of one branch in isolation: the `Employee` and division
/// bootstraps, the compiled constraint, the five monitor rules for
/// `AnyFour_{branch}` and a revoke rule for every role except the monitor.
/// The query asks whether `user` can reach the monitor.
pub fn division_policy(division: Division, branch: usize, user: UserId) -> Policy {
    let admin = admin_role();
    let set = BranchRoleSet::new(branch);
    let roles = set.division(division);
    let any_four = any_four_role(branch);
    let constraint = roles.sop_constraint();

    let mut revocable = vec![set.employee.clone(), roles.role.clone()];
    revocable.extend(roles.non_managerial.iter().cloned());

    let mut ca = vec![
        CanAssignRule::new(admin.clone(), Precondition::always(), set.employee.clone()),
        CanAssignRule::new(
            admin.clone(),
            Precondition::new([set.employee.clone()], []),
            roles.role.clone(),
        ),
    ];
    ca.extend(
        compile_sop(&constraint, &BTreeSet::from([roles.role.clone()]), &admin)
            .expect("division role and Admin are outside the constraint")
            .assign_rules,
    );
    ca.extend(
        compile_sop_monitor(&constraint, &any_four, &admin)
            .expect("monitor is outside the constraint"),
    );

    let mut all_roles = vec![admin.clone()];
    all_roles.extend(revocable.iter().cloned());
    all_roles.push(any_four.clone());
    Policy {
        roles: all_roles,
        users: vec![user.clone()],
        ua: Vec::new(),
        ca,
        cr: revocable
            .into_iter()
            .map(|r| CanRevokeRule::new(admin.clone(), r))
            .collect(),
        hierarchy: Default::default(),
        admin_roles: vec![admin],
        queries: vec![SafetyQuery::new(user, any_four)],
    }
}

fn instrument(config: &BankConfig, branches: &[BranchRoleSet], policy: &mut Policy) {
    let admin = admin_role();
    let b = config.branches;
    for branch in branches {
        let i = branch.branch;
        let any_four = any_four_role(i);
        let helper = branch_helper_role(i);
        for division in &branch.divisions {
            policy.ca.extend(
                compile_sop_monitor(&division.sop_constraint(), &any_four, &admin)
                    .expect("monitor is outside the constraint"),
            );
        }
        policy.ca.push(CanAssignRule::new(
            admin.clone(),
            Precondition::new([any_four.clone()], []),
            helper.clone(),
        ));
        if i < b {
            policy.ca.push(CanAssignRule::new(
                admin.clone(),
                Precondition::new([branch_helper_role(i + 1)], []),
                helper.clone(),
            ));
        }
        policy.roles.push(any_four);
        policy.roles.push(helper);
    }

    let mut add_question = |target: RoleId, pre: Precondition| {
        policy.roles.push(target.clone());
        policy
            .ca
            .push(CanAssignRule::new(admin.clone(), pre, target.clone()));
        policy
            .queries
            .push(SafetyQuery::new(config.analysis_user.clone(), target));
    };
    if config.instrumentation.q1() {
        add_question(
            named(TARGET_Q1.to_owned()),
            Precondition::new([branch_helper_role(1)], []),
        );
    }
    if config.instrumentation.q2() {
        let required: Vec<RoleId> = match config.q2_encoding {
            Q2Encoding::Chain => (1..=b).map(branch_helper_role).collect(),
            Q2Encoding::Direct => (1..=b).map(any_four_role).collect(),
        };
        add_question(config.q2_target(), Precondition::new(required, []));
    }
}
