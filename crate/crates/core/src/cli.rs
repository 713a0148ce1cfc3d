//! Command-line driver.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::bench::{generate, Benchmark, Family};
use crate::cutoff::AdequateOrder;
use crate::error::LoadError;
use crate::explorer::{explore, ChoicePolicy, Eviction, ExploreError, ExploreOptions};
use crate::model::{is_petri_net, load_system, syntactic_independence, DependenceMode, PetriNet, SystemDef};
use crate::oracle::{cross_check, CheckStatus, OracleBounds};
use crate::unfolding::unfolding_dot;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BOUND: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "unfold-dpor", version, about = "Optimal partial-order exploration of concurrent systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Explore a system file or a generated benchmark.
    Run(RunArgs),
    /// Write a benchmark system to a file (or stdout).
    Gen {
        /// writer-readers, flip, ccnf:N, readers:N or prodcons:MAX.
        family: Family,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Frontend {
    Auto,
    System,
    PetriNet,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Dependence {
    Syntactic,
    ClassicNet,
    ReadArcs,
    Explicit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Policy {
    Ordered,
    Random,
}

#[derive(clap::Args, Debug)]
struct RunArgs {
    /// System (.json) or Petri net file.
    #[arg(required_unless_present = "gen", conflicts_with = "gen")]
    input: Option<PathBuf>,
    /// Explore a generated benchmark instead of a file.
    #[arg(long, value_name = "FAMILY:PARAM")]
    gen: Option<Family>,
    #[arg(long, value_enum, default_value = "auto")]
    frontend: Frontend,
    /// Independence relation; defaults to the file's declaration (read-arcs for nets).
    #[arg(long, value_enum)]
    dependence: Option<Dependence>,
    #[arg(long)]
    no_cutoffs: bool,
    #[arg(long, default_value = "size", value_parser = ["size", "total"])]
    order: String,
    #[arg(long, value_enum, default_value = "ordered")]
    policy: Policy,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    max_events: Option<usize>,
    #[arg(long)]
    max_depth: Option<usize>,
    /// Write statistics JSON here.
    #[arg(long, value_name = "PATH")]
    stats: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    dot_unfolding: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    dot_calltree: Option<PathBuf>,
    /// Cross-check against the brute-force oracle.
    #[arg(long)]
    verify: bool,
    /// Cache eviction: none, all or lru:N.
    #[arg(long, default_value = "none")]
    cache: Eviction,
}

/// Runs the command line with `args` (program name first) and returns the exit code.
pub fn run(args: impl IntoIterator<Item = OsString>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    match cli.command {
        Command::Gen { family, output } => gen(family, output.as_deref(), out, err),
        Command::Run(args) => run_explore(&args, out, err),
    }
}

fn gen(family: Family, output: Option<&Path>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let bench = match generate(family) {
        Ok(b) => b,
        Err(m) => {
            let _ = writeln!(err, "error: {m}");
            return EXIT_USAGE;
        }
    };
    let text = serde_json::to_string_pretty(&bench.to_json()).expect("json values serialize") + "\n";
    match output {
        Some(p) => write_file(p, &text, err),
        None => {
            let _ = out.write_all(text.as_bytes());
            EXIT_OK
        }
    }
}

fn write_file(path: &Path, text: &str, err: &mut dyn Write) -> i32 {
    match fs::write(path, text) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {}: {e}", path.display());
            EXIT_USAGE
        }
    }
}

fn load(args: &RunArgs) -> Result<SystemDef, String> {
    let bench = match (&args.input, args.gen) {
        (_, Some(family)) => generate(family)?,
        (Some(path), None) => {
            let text = fs::read_to_string(path)
                .map_err(|source| LoadError::Io { path: path.display().to_string(), source }.to_string())?;
            let is_net = match args.frontend {
                Frontend::System => false,
                Frontend::PetriNet => true,
                Frontend::Auto => is_petri_net(&text),
            };
            let parsed = if is_net {
                PetriNet::parse(&text).map(Benchmark::Net)
            } else {
                load_system(&text).map(Benchmark::System)
            };
            parsed.map_err(|e| format!("{}: {e}", path.display()))?
        }
        (None, None) => return Err("no input given".into()),
    };
    match (bench, args.dependence) {
        (Benchmark::System(sys), None | Some(Dependence::Explicit)) => Ok(sys),
        (Benchmark::System(sys), Some(Dependence::Syntactic)) => {
            let rel = syntactic_independence(&sys);
            Ok(sys.with_independence(rel))
        }
        (Benchmark::System(_), Some(d)) => Err(format!("--dependence {d:?} applies to Petri nets only")),
        (Benchmark::Net(net), None | Some(Dependence::ReadArcs)) => Ok(net.compile(DependenceMode::ReadArcs)),
        (Benchmark::Net(net), Some(Dependence::ClassicNet)) => Ok(net.compile(DependenceMode::Classic)),
        (Benchmark::Net(net), Some(Dependence::Syntactic)) => {
            let sys = net.compile(DependenceMode::Classic);
            let rel = syntactic_independence(&sys);
            Ok(sys.with_independence(rel))
        }
        (Benchmark::Net(_), Some(Dependence::Explicit)) => Err("Petri nets have no explicit relation".into()),
    }
}

fn run_explore(args: &RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let sys = match load(args) {
        Ok(s) => s,
        Err(m) => {
            let _ = writeln!(err, "error: {m}");
            return EXIT_USAGE;
        }
    };
    let opts = ExploreOptions {
        cutoffs: !args.no_cutoffs,
        order: args.order.parse::<AdequateOrder>().expect("validated by clap"),
        policy: match args.policy {
            Policy::Ordered => ChoicePolicy::Ordered,
            Policy::Random => ChoicePolicy::Random(args.seed),
        },
        max_events: args.max_events,
        max_depth: args.max_depth,
        cache: args.cache,
        record_call_tree: args.dot_calltree.is_some(),
        ..Default::default()
    };
    let result = match explore(&sys, &opts) {
        Ok(r) => r,
        Err(e @ (ExploreError::EventBound(_) | ExploreError::DepthBound(_))) => {
            let _ = writeln!(err, "aborted: {e}");
            return EXIT_BOUND;
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_FAILURE;
        }
    };
    let report = &result.report;
    let _ = writeln!(
        out,
        "max_configs {}  events {}  cutoffs {}  avg_U_at_leaves {:.2}  time_ms {:.1}",
        report.max_configs, report.events, report.cutoffs, report.avg_u_at_leaves, report.time_ms
    );
    let mut code = EXIT_OK;
    for hit in &report.assertion_hits {
        let _ = writeln!(out, "assertion violated at {} after {}", hit.state, hit.run.join("."));
        code = EXIT_FAILURE;
    }
    let mut writes = Vec::new();
    if let Some(p) = &args.stats {
        let text = serde_json::to_string_pretty(&report.stats_json()).expect("json values serialize") + "\n";
        writes.push((p, text));
    }
    if let Some(p) = &args.dot_unfolding {
        writes.push((p, unfolding_dot(&result.store, Some(result.live.ever_u()))));
    }
    if let (Some(p), Some(tree)) = (&args.dot_calltree, &result.call_tree) {
        writes.push((p, tree.to_dot()));
    }
    for (p, text) in writes {
        if write_file(p, &text, err) != EXIT_OK {
            return EXIT_USAGE;
        }
    }
    if args.verify {
        let verdict = cross_check(&sys, &result, &OracleBounds::default());
        for c in &verdict.checks {
            let status = match c.status {
                CheckStatus::Pass => "pass",
                CheckStatus::Fail => "FAIL",
                CheckStatus::Skipped => "skip",
            };
            let _ = writeln!(out, "verify {:<12} {status}  {}", c.name, c.detail);
        }
        if !verdict.passed() {
            code = EXIT_FAILURE;
        }
    }
    code
}
