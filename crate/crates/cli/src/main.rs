//! `arbac`: generate, compile, validate and check ARBAC policies.

mod commands;

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

/// Default state cap for `check`; `0` disables it.
pub const MAX_STATES_ENV: &str = "ARBAC_MAX_STATES";
const DEFAULT_MAX_STATES: usize = 5_000_000;

#[derive(Debug, Parser)]
#[command(name = "arbac", version, about = "Administrative RBAC policy toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate the multi-branch bank policy.
    Generate(GenerateArgs),
    /// Answer the policy's safety queries.
    Check(CheckArgs),
    /// Compile a separation-of-privilege constraint into a CA section.
    CompileSop(CompileSopArgs),
    /// Report well-formedness diagnostics.
    Validate(FileArg),
    /// Print role, rule and precondition statistics.
    Stats(StatsArgs),
    /// Re-print a policy in canonical form.
    Fmt(FileArg),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum QueriesArg {
    None,
    Q1,
    Q2,
    Both,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum HierarchyArg {
    Flat,
    Hierarchical,
}

#[derive(Debug, clap::Args)]
struct GenerateArgs {
    #[arg(long)]
    branches: usize,
    #[arg(long, value_enum, default_value = "none")]
    queries: QueriesArg,
    #[arg(long, value_enum, default_value = "flat")]
    hierarchy: HierarchyArg,
    /// The analysed user.
    #[arg(long, default_value = arbac_core::bank::DEFAULT_ANALYSIS_USER)]
    user: String,
    /// Encode the all-branches question over the AnyFour roles directly
    /// (target TargetQ2Direct) instead of the Branch_i chain.
    #[arg(long)]
    q2_direct: bool,
    /// Write here instead of standard output.
    #[arg(long, short)]
    out: Option<std::path::PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EngineArg {
    Bfs,
    Modular,
    Auto,
    /// Brute force over whole role sets; small policies only.
    Oracle,
}

#[derive(Debug, clap::Args)]
struct CheckArgs {
    /// Policy file, or `-` for standard input.
    path: String,
    /// Check `user:role` instead of the SPEC queries.
    #[arg(long)]
    query: Option<String>,
    #[arg(long, value_enum, default_value = "bfs")]
    engine: EngineArg,
    #[arg(long)]
    no_slicing: bool,
    #[arg(long, env = MAX_STATES_ENV, default_value_t = DEFAULT_MAX_STATES)]
    max_states: usize,
    #[arg(long)]
    max_depth: Option<usize>,
    /// One JSON object per query on standard output.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, clap::Args)]
struct CompileSopArgs {
    /// Comma-separated constrained roles.
    #[arg(long, value_delimiter = ',', required = true)]
    roles: Vec<String>,
    #[arg(long)]
    limit: usize,
    /// Comma-separated roles added positively to every rule.
    #[arg(long, value_delimiter = ',')]
    guard: Vec<String>,
    #[arg(long, default_value = arbac_core::bank::ADMIN_ROLE)]
    admin: String,
    /// Also emit rules assigning this monitor role on a violation.
    #[arg(long)]
    monitor: Option<String>,
}

#[derive(Debug, clap::Args)]
struct FileArg {
    /// Policy file, or `-` for standard input.
    path: String,
}

#[derive(Debug, clap::Args)]
struct StatsArgs {
    path: String,
    /// Print a JSON object on standard output.
    #[arg(long)]
    json: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Generate(args) => commands::generate(args),
        Command::Check(args) => commands::check(args),
        Command::CompileSop(args) => commands::compile_sop(args),
        Command::Validate(args) => commands::validate(args),
        Command::Stats(args) => commands::stats(args),
        Command::Fmt(args) => commands::fmt(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
