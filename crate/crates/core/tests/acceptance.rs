//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

mod common;

use std::collections::{BTreeSet, HashSet};
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use arbac_core::bank::{
    division_policy, generate_bank, BankConfig, Division, Instrumentation, Q2Encoding,
    ROLES_PER_BRANCH,
};
use arbac_core::sop::{compile_sop, SopConstraint};
use arbac_core::{
    analyze, oracle_reach, parse_policy, reach, replay, serialize_policy, CanAssignRule, Engine,
    Outcome, Policy, Precondition, SafetyQuery, SearchLimits,
};
use common::{drop_junior_from_clerk_row, random_policy, role, user, Shape};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn peak_rss_mib() -> Option<u64> {
    let status = fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kib: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kib / 1024)
}

fn new_user_query(target: &str) -> SafetyQuery {
    SafetyQuery::new(user("newUser"), role(target))
}

fn bank(branches: usize, instrumentation: Instrumentation) -> Policy {
    generate_bank(&BankConfig::new(branches).with_instrumentation(instrumentation)).unwrap()
}

fn structural_counts() -> Check {
    let ((policy, text), took) = timed(|| {
        let p = bank(18, Instrumentation::None);
        let t = serialize_policy(&p).unwrap();
        (p, t)
    });
    let branch_roles = policy
        .roles
        .iter()
        .filter(|r| r.as_str().contains('@'))
        .count();
    ensure!(branch_roles == 594, "{branch_roles} branch roles");
    ensure!(18 * ROLES_PER_BRANCH == 594, "roles per branch");
    ensure!(
        policy.cr.len() == 594,
        "{} can_revoke rules",
        policy.cr.len()
    );
    let revoked: BTreeSet<_> = policy.cr.iter().map(|r| &r.target).collect();
    ensure!(revoked.len() == 594, "can_revoke targets not distinct");
    ensure!(took < Duration::from_secs(5), "took {took:?}");
    Ok(format!(
        "594 branch roles, 594 cr rules, {} bytes in {took:.2?}",
        text.len()
    ))
}

fn fa_clerk_rules() -> Check {
    let names = [
        "FA-Asst",
        "FA-Specialist",
        "FA-Senior",
        "FA-Junior",
        "FA-Clerk",
    ];
    let constraint = SopConstraint::new(names.iter().map(|r| role(r)).collect(), 3).unwrap();
    let guard = BTreeSet::from([role("FA")]);
    let compiled = compile_sop(&constraint, &guard, &role("Admin")).unwrap();
    let got: HashSet<CanAssignRule> = compiled.rules_for(&role("FA-Clerk")).cloned().collect();

    // held Asst, Specialist, Senior, Junior per row, as printed
    let rows = [
        "0000", "1000", "0100", "0010", "0001", "0011", "0101", "0110", "1001", "1010", "1100",
    ];
    let expected: HashSet<CanAssignRule> = rows
        .iter()
        .map(|row| {
            let (pos, neg): (Vec<_>, Vec<_>) = names[..4]
                .iter()
                .zip(row.chars())
                .partition(|(_, bit)| *bit == '1');
            CanAssignRule::new(
                role("Admin"),
                Precondition::new(
                    std::iter::once(role("FA")).chain(pos.into_iter().map(|(r, _)| role(r))),
                    neg.into_iter().map(|(r, _)| role(r)),
                ),
                role("FA-Clerk"),
            )
        })
        .collect();
    ensure!(expected.len() == 11, "table rows not distinct");
    ensure!(
        compiled.rules_for(&role("FA-Clerk")).count() == 11,
        "duplicate rules emitted"
    );
    ensure!(got == expected, "rule sets differ");
    Ok("11 rows, equal as a set".into())
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn count_law() -> Check {
    let mut cases = 0;
    for size in 1..=6 {
        let set: Vec<_> = (0..size).map(|i| role(&format!("s{i}"))).collect();
        for limit in 1..=size {
            let c = SopConstraint::new(set.clone(), limit).unwrap();
            let out = compile_sop(&c, &BTreeSet::new(), &role("Admin")).unwrap();
            let law: usize = (0..limit).map(|k| binomial(size - 1, k)).sum();
            for target in &set {
                // enumerate the held subsets of the other roles directly
                let others: Vec<_> = set.iter().filter(|r| *r != target).collect();
                let enumerated = (0u32..1 << others.len())
                    .filter(|m| (m.count_ones() as usize) < limit)
                    .count();
                let emitted = out.rules_for(target).count();
                ensure!(
                    emitted == law && enumerated == law,
                    "|S|={size} t={limit}: emitted {emitted}, enumerated {enumerated}, law {law}"
                );
            }
            cases += 1;
        }
    }
    Ok(format!("{cases} (|S|, t) pairs"))
}

fn micro_safety() -> Check {
    let policy = division_policy(Division::FinancialAnalyst, 1, user("newUser"));
    let q = policy.queries[0].clone();
    let ((bfs, oracle), took) = timed(|| {
        (
            reach(&policy, &q, SearchLimits::unlimited(), true).unwrap(),
            oracle_reach(&policy, &q).unwrap(),
        )
    });
    ensure!(
        bfs.outcome == Outcome::Unreachable,
        "reach: {:?}",
        bfs.outcome
    );
    ensure!(bfs.exhausted, "reach not exhausted");
    ensure!(
        oracle.outcome == Outcome::Unreachable,
        "oracle: {:?}",
        oracle.outcome
    );
    ensure!(oracle.exhausted, "oracle not exhausted");
    ensure!(took < Duration::from_secs(1), "took {took:?}");
    Ok(format!(
        "unreachable, {} / {} states, {took:.2?}",
        bfs.states_explored, oracle.states_explored
    ))
}

fn case_study_safety() -> Check {
    let one = bank(1, Instrumentation::Q1);
    let (v, took) = timed(|| {
        reach(
            &one,
            &new_user_query("TargetQ1"),
            SearchLimits::unlimited(),
            true,
        )
        .unwrap()
    });
    ensure!(v.outcome == Outcome::Unreachable, "{:?}", v.outcome);
    ensure!(v.exhausted, "not exhausted");
    ensure!(took < Duration::from_secs(60), "B=1 took {took:?}");
    let rss = peak_rss_mib();
    ensure!(rss.is_none_or(|m| m < 2048), "peak rss {rss:?} MiB");

    let per_branch = |p: &Policy, target: &str| {
        timed(|| reach(p, &new_user_query(target), SearchLimits::unlimited(), true).unwrap())
    };
    let (base, base_time) = per_branch(&one, "AnyFour_1");
    ensure!(base.outcome == Outcome::Unreachable, "AnyFour_1 at B=1");
    let eighteen = bank(18, Instrumentation::Q1);
    let mut worst = 0.0f64;
    for target in ["AnyFour_1", "AnyFour_18"] {
        let (v, t) = per_branch(&eighteen, target);
        ensure!(
            v.outcome == Outcome::Unreachable && v.exhausted,
            "{target} at B=18: {:?}",
            v.outcome
        );
        ensure!(
            v.states_explored == base.states_explored,
            "{target}: slicing kept other branches ({} vs {} states)",
            v.states_explored,
            base.states_explored
        );
        worst = worst.max(t.as_secs_f64() / base_time.as_secs_f64());
    }
    ensure!(worst.le(&10.0), "B=18 / B=1 time ratio {worst:.2}");
    Ok(format!(
        "TargetQ1 unreachable in {took:.2?} ({} states), peak rss {} MiB, B=18/B=1 ratio {worst:.2}",
        v.states_explored,
        rss.map_or("n/a".into(), |m| m.to_string())
    ))
}

fn mutation_detection() -> Check {
    let start = Instant::now();
    let mut full = bank(1, Instrumentation::Q1);
    drop_junior_from_clerk_row(&mut full, "FA", 1);
    let q = new_user_query("AnyFour_1");
    let v = reach(&full, &q, SearchLimits::unlimited(), true).unwrap();
    let Some(w) = v.outcome.witness() else {
        return Err(format!("not reachable: {:?}", v.outcome));
    };
    ensure!(replay(&full, &q, w), "witness does not replay");

    // the oracle is limited to small policies; the mutated division in
    // isolation holds every role a shortest path can use
    let mut division = division_policy(Division::FinancialAnalyst, 1, user("newUser"));
    drop_junior_from_clerk_row(&mut division, "FA", 1);
    let oracle = oracle_reach(&division, &q).unwrap();
    let Some(shortest) = oracle.outcome.witness() else {
        return Err("oracle: not reachable".into());
    };
    ensure!(
        replay(&division, &q, shortest),
        "oracle witness does not replay"
    );
    ensure!(
        w.len() == shortest.len(),
        "witness {} steps, oracle {}",
        w.len(),
        shortest.len()
    );
    let took = start.elapsed();
    ensure!(took < Duration::from_secs(5), "took {took:?}");
    Ok(format!(
        "witness of {} assigns = oracle shortest, {took:.2?}",
        w.len()
    ))
}

fn differential() -> Check {
    let mut agree = 0;
    let mut reachable = 0;
    for seed in 0..500 {
        let p = random_policy(seed, Shape::SMALL);
        let q = &p.queries[0];
        let oracle = oracle_reach(&p, q).unwrap();
        let mut ok = true;
        for slicing in [false, true] {
            let v = reach(&p, q, SearchLimits::unlimited(), slicing).unwrap();
            ok &= v.outcome.same_answer(&oracle.outcome);
            if let Some(w) = v.outcome.witness() {
                ensure!(replay(&p, q, w), "seed {seed}: witness fails replay");
            }
        }
        if let Some(w) = oracle.outcome.witness() {
            ensure!(replay(&p, q, w), "seed {seed}: oracle witness fails replay");
            reachable += 1;
        }
        agree += usize::from(ok);
    }
    ensure!(agree == 500, "{agree}/500 agree");
    Ok(format!("500/500 agree ({reachable} reachable)"))
}

fn round_trip() -> Check {
    let mut checked = Vec::new();
    for branches in [1, 2, 18] {
        let policy = bank(branches, Instrumentation::Both);
        let text = serialize_policy(&policy).unwrap();
        let parsed = parse_policy(&text).map_err(|e| e.to_string())?;
        ensure!(parsed == policy, "B={branches}: parse changed the policy");
        ensure!(
            serialize_policy(&parsed).unwrap() == text,
            "B={branches}: re-serialization differs"
        );
        checked.push(format!("B={branches}"));
    }
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/corpus");
    let mut files = 0;
    for entry in fs::read_dir(dir).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        if path.extension().is_none_or(|x| x != "arbac") {
            continue;
        }
        let text = fs::read_to_string(&path).map_err(|e| e.to_string())?;
        let policy = parse_policy(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        let once = serialize_policy(&policy).unwrap();
        let reparsed = parse_policy(&once).unwrap();
        ensure!(reparsed == policy, "{}: parse changed", path.display());
        ensure!(
            serialize_policy(&reparsed).unwrap() == once,
            "{}: not byte-exact",
            path.display()
        );
        files += 1;
    }
    ensure!(files > 0, "empty corpus");
    Ok(format!("{} and {files} corpus files", checked.join(", ")))
}

fn all_branches_question() -> Check {
    let start = Instant::now();
    let chain_cfg = BankConfig::new(18).with_instrumentation(Instrumentation::Q2);
    let mut chain = generate_bank(&chain_cfg).unwrap();
    drop_junior_from_clerk_row(&mut chain, "FA", 18);
    let q = new_user_query("TargetQ2");
    let (engine, v) = analyze(&chain, &q, SearchLimits::unlimited(), true, Engine::Auto)
        .map_err(|e| e.to_string())?;
    let Some(w) = v.outcome.witness() else {
        return Err(format!("chain encoding: {:?}", v.outcome));
    };
    ensure!(replay(&chain, &q, w), "witness does not replay");
    let touched: BTreeSet<_> = w
        .steps
        .iter()
        .filter_map(|s| s.role.as_str().split_once('@').map(|(_, b)| b.to_owned()))
        .collect();
    ensure!(
        touched == BTreeSet::from(["18".to_owned()]),
        "witness touches branches {touched:?}"
    );

    let mut direct = generate_bank(&chain_cfg.with_q2_encoding(Q2Encoding::Direct)).unwrap();
    drop_junior_from_clerk_row(&mut direct, "FA", 18);
    let dq = new_user_query("TargetQ2Direct");
    let (direct_engine, d) = analyze(&direct, &dq, SearchLimits::unlimited(), true, Engine::Auto)
        .map_err(|e| e.to_string())?;
    ensure!(
        d.outcome == Outcome::Unreachable && d.exhausted,
        "direct encoding: {:?}",
        d.outcome
    );
    Ok(format!(
        "chain: reachable via branch 18 alone ({} steps, {}); direct: unreachable ({}), {:.2?}",
        w.len(),
        engine.label(),
        direct_engine.label(),
        start.elapsed()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("structural counts", structural_counts),
        ("FA-Clerk rules", fa_clerk_rules),
        ("count law", count_law),
        ("SOP safety, single division", micro_safety),
        ("SOP safety, case study", case_study_safety),
        ("mutation detection", mutation_detection),
        ("differential correctness", differential),
        ("round-trip", round_trip),
        ("all-branches question", all_branches_question),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match result {
            Ok(detail) => println!("PASS  AC{} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL  AC{} {name}: {why}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
