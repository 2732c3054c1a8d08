use std::collections::BTreeMap;
use std::io::{self, Read, Write};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use arbac_core::analyzer::{oracle_reach, OracleError};
use arbac_core::bank::{generate_bank, BankConfig, HierarchyMode, Instrumentation, Q2Encoding};
use arbac_core::model::validate as diagnostics;
use arbac_core::sop::{self, SopConstraint};
use arbac_core::text::render_ca_section;
use arbac_core::{
    analyze, parse_policy, serialize_policy, Engine, Outcome, Policy, RoleId, SafetyQuery,
    SearchLimits, UserId, Verdict,
};
use serde_json::json;

use crate::{
    CheckArgs, CompileSopArgs, EngineArg, FileArg, GenerateArgs, HierarchyArg, QueriesArg,
    StatsArgs,
};

const EXIT_OK: u8 = 0;
const EXIT_FAILED: u8 = 1;
const EXIT_REACHABLE: u8 = 2;
const EXIT_UNKNOWN: u8 = 3;

fn read_source(path: &str) -> Result<(String, String)> {
    if path == "-" {
        let mut text = String::new();
        io::stdin()
            .read_to_string(&mut text)
            .context("reading standard input")?;
        Ok(("<stdin>".to_owned(), text))
    } else {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
        Ok((path.to_owned(), text))
    }
}

fn load(path: &str) -> Result<Policy> {
    let (name, text) = read_source(path)?;
    parse_policy(&text).map_err(|e| {
        let expected = if e.expected.is_empty() {
            String::new()
        } else {
            format!(" (expected {})", e.expected.join(", "))
        };
        anyhow!("{name}:{e}{expected}")
    })
}

fn role(name: &str) -> Result<RoleId> {
    RoleId::new(name).map_err(|e| anyhow!("{e}"))
}

pub fn generate(args: GenerateArgs) -> Result<u8> {
    let instrumentation = match args.queries {
        QueriesArg::None => Instrumentation::None,
        QueriesArg::Q1 => Instrumentation::Q1,
        QueriesArg::Q2 => Instrumentation::Q2,
        QueriesArg::Both => Instrumentation::Both,
    };
    let hierarchy = match args.hierarchy {
        HierarchyArg::Flat => HierarchyMode::Flat,
        HierarchyArg::Hierarchical => HierarchyMode::Hierarchical,
    };
    let mut config = BankConfig::new(args.branches)
        .with_instrumentation(instrumentation)
        .with_hierarchy(hierarchy);
    if args.q2_direct {
        config = config.with_q2_encoding(Q2Encoding::Direct);
    }
    config.analysis_user = UserId::new(args.user).map_err(|e| anyhow!("{e}"))?;

    let policy = generate_bank(&config)?;
    let text = serialize_policy(&policy)?;
    match &args.out {
        Some(path) => {
            std::fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?
        }
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    eprintln!(
        "roles: {}  ca: {}  cr: {}",
        policy.roles.len(),
        policy.ca.len(),
        policy.cr.len()
    );
    Ok(EXIT_OK)
}

fn parse_query(spec: &str) -> Result<SafetyQuery> {
    let (user, target) = spec
        .split_once(':')
        .ok_or_else(|| anyhow!("query {spec:?} is not of the form user:role"))?;
    Ok(SafetyQuery::new(
        UserId::new(user).map_err(|e| anyhow!("{e}"))?,
        role(target)?,
    ))
}

fn run_query(
    policy: &Policy,
    query: &SafetyQuery,
    args: &CheckArgs,
    limits: SearchLimits,
) -> Result<(&'static str, Verdict)> {
    let slicing = !args.no_slicing;
    let engine = match args.engine {
        EngineArg::Oracle => {
            return match oracle_reach(policy, query) {
                Ok(v) => Ok(("oracle", v)),
                Err(OracleError::TooLarge { roles, cap }) => {
                    bail!("oracle handles at most {cap} roles, policy has {roles}")
                }
                Err(OracleError::Invalid(e)) => Err(e.into()),
            };
        }
        EngineArg::Bfs => Engine::Bfs,
        EngineArg::Modular => Engine::Modular,
        EngineArg::Auto => Engine::Auto,
    };
    let (used, verdict) = analyze(policy, query, limits, slicing, engine)?;
    Ok((used.label(), verdict))
}

fn report_json(query: &SafetyQuery, verdict: &Verdict, engine: &str, millis: u128) -> String {
    let witness: Vec<_> = verdict
        .outcome
        .witness()
        .map(|w| {
            w.steps
                .iter()
                .map(|s| json!({"kind": s.kind.as_str(), "ruleIndex": s.rule_index, "role": s.role.as_str()}))
                .collect()
        })
        .unwrap_or_default();
    json!({
        "query": {"user": query.user.as_str(), "role": query.target.as_str()},
        "verdict": verdict.outcome.label(),
        "witness": witness,
        "statesExplored": verdict.states_explored,
        "exhausted": verdict.exhausted,
        "slicedRoleCount": verdict.sliced_role_count,
        "engine": engine,
        "wallTimeMs": millis,
    })
    .to_string()
}

fn report_text(
    policy: &Policy,
    query: &SafetyQuery,
    verdict: &Verdict,
    engine: &str,
    millis: u128,
) {
    eprintln!(
        "<{}, {}>: {} ({} states{}, {} roles after slicing, {engine}, {millis} ms)",
        query.user,
        query.target,
        verdict.outcome.label(),
        verdict.states_explored,
        if verdict.exhausted { ", exhausted" } else { "" },
        verdict.sliced_role_count,
    );
    if let Some(w) = verdict.outcome.witness() {
        for (i, step) in w.steps.iter().enumerate() {
            let rule = match step.kind {
                arbac_core::model::ActionKind::Assign => policy.ca[step.rule_index].to_string(),
                arbac_core::model::ActionKind::Revoke => policy.cr[step.rule_index].to_string(),
            };
            eprintln!(
                "  {:>3}. {} {}  via {rule}",
                i + 1,
                step.kind.as_str(),
                step.role
            );
        }
    }
}

pub fn check(args: CheckArgs) -> Result<u8> {
    let policy = load(&args.path)?;
    let errors: Vec<_> = diagnostics(&policy)
        .into_iter()
        .filter(|d| d.is_error())
        .collect();
    if !errors.is_empty() {
        for d in &errors {
            eprintln!("{d}");
        }
        bail!("{} is not well-formed", args.path);
    }
    let queries = match &args.query {
        Some(spec) => vec![parse_query(spec)?],
        None => policy.queries.clone(),
    };
    if queries.is_empty() {
        bail!("no queries: add a SPEC line or pass --query user:role");
    }
    let limits = SearchLimits {
        max_states: (args.max_states > 0).then_some(args.max_states),
        max_depth: args.max_depth,
    };

    let mut reachable = false;
    let mut unknown = false;
    let mut stdout = io::stdout().lock();
    for query in &queries {
        let start = Instant::now();
        let (engine, verdict) = run_query(&policy, query, &args, limits)?;
        let millis = start.elapsed().as_millis();
        match verdict.outcome {
            Outcome::Reachable(_) => reachable = true,
            Outcome::Unknown => unknown = true,
            Outcome::Unreachable => {}
        }
        if args.json {
            writeln!(stdout, "{}", report_json(query, &verdict, engine, millis))?;
            stdout.flush()?;
        } else {
            report_text(&policy, query, &verdict, engine, millis);
        }
    }
    Ok(if reachable {
        EXIT_REACHABLE
    } else if unknown {
        EXIT_UNKNOWN
    } else {
        EXIT_OK
    })
}

pub fn compile_sop(args: CompileSopArgs) -> Result<u8> {
    let roles = args
        .roles
        .iter()
        .map(|r| role(r))
        .collect::<Result<Vec<_>>>()?;
    let guard = args.guard.iter().map(|r| role(r)).collect::<Result<_>>()?;
    let admin = role(&args.admin)?;
    let constraint = SopConstraint::new(roles, args.limit)?;
    let mut rules = sop::compile_sop(&constraint, &guard, &admin)?.assign_rules;
    if let Some(monitor) = &args.monitor {
        rules.extend(sop::compile_sop_monitor(
            &constraint,
            &role(monitor)?,
            &admin,
        )?);
    }
    io::stdout()
        .lock()
        .write_all(render_ca_section(&rules).as_bytes())?;
    eprintln!("rules: {}", rules.len());
    Ok(EXIT_OK)
}

pub fn validate(args: FileArg) -> Result<u8> {
    let policy = load(&args.path)?;
    let found = diagnostics(&policy);
    for d in &found {
        eprintln!("{d}");
    }
    if found.is_empty() {
        eprintln!("{}: ok", args.path);
        Ok(EXIT_OK)
    } else {
        Ok(EXIT_FAILED)
    }
}

pub fn fmt(args: FileArg) -> Result<u8> {
    let policy = load(&args.path)?;
    let text = serialize_policy(&policy).map_err(|e| {
        for d in &e.0 {
            eprintln!("{d}");
        }
        anyhow!("{} is not well-formed", args.path)
    })?;
    io::stdout().lock().write_all(text.as_bytes())?;
    Ok(EXIT_OK)
}

fn histogram(sizes: impl Iterator<Item = usize>) -> BTreeMap<usize, usize> {
    let mut out = BTreeMap::new();
    for size in sizes {
        *out.entry(size).or_insert(0) += 1;
    }
    out
}

pub fn stats(args: StatsArgs) -> Result<u8> {
    let p = load(&args.path)?;
    let positive = histogram(p.ca.iter().map(|r| r.pre.positive.len()));
    let negative = histogram(p.ca.iter().map(|r| r.pre.negative.len()));
    let mixed = p.ca.iter().filter(|r| r.pre.is_mixed()).count();
    if args.json {
        let hist = |h: &BTreeMap<usize, usize>| -> serde_json::Map<String, serde_json::Value> {
            h.iter().map(|(k, v)| (k.to_string(), json!(v))).collect()
        };
        let out = json!({
            "roles": p.roles.len(),
            "users": p.users.len(),
            "ua": p.ua.len(),
            "ca": p.ca.len(),
            "cr": p.cr.len(),
            "hierarchyEdges": p.hierarchy.edges.len(),
            "adminRoles": p.admin_roles.len(),
            "queries": p.queries.len(),
            "positiveSizes": hist(&positive),
            "negativeSizes": hist(&negative),
            "mixed": mixed,
        });
        writeln!(io::stdout().lock(), "{out}")?;
        return Ok(EXIT_OK);
    }
    eprintln!("roles:           {}", p.roles.len());
    eprintln!("users:           {}", p.users.len());
    eprintln!("ua:              {}", p.ua.len());
    eprintln!("ca rules:        {}", p.ca.len());
    eprintln!("cr rules:        {}", p.cr.len());
    eprintln!("hierarchy edges: {}", p.hierarchy.edges.len());
    eprintln!("admin roles:     {}", p.admin_roles.len());
    eprintln!("queries:         {}", p.queries.len());
    eprintln!("mixed ca rules:  {mixed}");
    for (label, hist) in [("positive", &positive), ("negative", &negative)] {
        eprintln!("{label} literals per ca rule:");
        for (size, count) in hist {
            eprintln!("  {size:>3}: {count}");
        }
    }
    Ok(EXIT_OK)
}
