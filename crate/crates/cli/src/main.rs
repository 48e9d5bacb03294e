//! `pursuit`: solve, reduce, play and verify pursuit games from the shell.
//!
//! Exit codes: 0 cops win, 10 robber wins, 20 state budget exceeded,
//! 2 malformed input, 1 any other failure (including a failed suite).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use pursuit::game::{GameSpec, Side, Start, Variant};
use pursuit::graph::{Annotations, LabelledGraph};
use pursuit::qbf::{normalize, parse_qdimacs, Qbf};
use pursuit::reductions::{self, CrpOptions, CrpsOptions, ReductionOutput};
use pursuit::solver::{self, SolveOptions, SpaceMode};
use pursuit::strategies;
use pursuit::suites::{self, SuiteConfig};
use pursuit::Error;

const EXIT_ROBBER: u8 = 10;
const EXIT_INFEASIBLE: u8 = 20;
const EXIT_MALFORMED: u8 = 2;

#[derive(Parser)]
#[command(name = "pursuit", version, about = "Exact solver and reductions for Cops and Robber games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide the winner of an instance or a plain graph.
    Solve(SolveArgs),
    /// Compile an input into a game instance.
    Reduce(ReduceArgs),
    /// Run a verification suite (or `all`).
    Verify(VerifyArgs),
    /// Play two named agents against each other.
    Play(PlayArgs),
    /// Evaluate a QDIMACS formula by brute force.
    EvalQbf(EvalArgs),
    /// Export a graph or instance.
    Export(ExportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Cr,
    Crp,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Cops,
    Robber,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Side {
        match s {
            SideArg::Cops => Side::Cops,
            SideArg::Robber => Side::Robber,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Reachable,
    Full,
}

#[derive(Args)]
struct BudgetArgs {
    /// Largest state-space estimate attempted.
    #[arg(long, env = "PURSUIT_BUDGET", default_value_t = solver::DEFAULT_BUDGET)]
    budget: u128,
}

#[derive(Args)]
struct SolveArgs {
    /// Instance JSON, or graph JSON together with `--cops`.
    #[arg(long, alias = "in")]
    graph: PathBuf,
    #[arg(long)]
    cops: Option<usize>,
    #[arg(long, value_enum, default_value = "cr")]
    variant: VariantArg,
    /// Side moving first after placement (overrides the instance).
    #[arg(long, value_enum)]
    first: Option<SideArg>,
    /// Fixed cop start, comma separated; requires `--robber`.
    #[arg(long, value_delimiter = ',')]
    start_cops: Option<Vec<usize>>,
    #[arg(long)]
    robber: Option<usize>,
    #[arg(long, value_enum, default_value = "reachable")]
    mode: ModeArg,
    #[command(flatten)]
    budget: BudgetArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReduceKind {
    Cr2crp,
    Crp2cr,
    Ds2crp,
    Qbf2crps,
    Qbf2crp,
}

#[derive(Args)]
struct ReduceArgs {
    #[arg(value_enum)]
    kind: ReduceKind,
    #[arg(long = "in")]
    input: PathBuf,
    /// Cop count for `cr2crp` and `crp2cr`.
    #[arg(long, default_value_t = 1)]
    cops: usize,
    /// Set size for `ds2crp`.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_enum, default_value = "cops")]
    first: SideArg,
    /// Reject formulas without clauses instead of warning.
    #[arg(long)]
    strict: bool,
    /// Separate heaven per gadget instead of one shared vertex.
    #[arg(long)]
    per_gadget_heavens: bool,
    /// Unprotected completion edges at the `a''` vertices.
    #[arg(long)]
    literal_level2: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write Graphviz output here.
    #[arg(long)]
    dot: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite name, or `all`.
    suite: String,
    #[arg(long, default_value_t = SuiteConfig::default().seed)]
    seed: u64,
    #[command(flatten)]
    budget: BudgetArgs,
}

#[derive(Args)]
struct PlayArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value = "solver")]
    cops: String,
    #[arg(long, default_value = "random")]
    robber: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    max: usize,
    #[command(flatten)]
    budget: BudgetArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long = "in")]
    input: PathBuf,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Graphviz output (the only format).
    #[arg(long)]
    dot: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Infeasible { .. } => EXIT_INFEASIBLE,
            Error::Parse { .. } | Error::Format(_) | Error::Json(_) | Error::UnknownVertex(_) | Error::InvalidGame(_) => {
                EXIT_MALFORMED
            }
            _ => 1,
        };
        Failure { code, msg: e.to_string() }
    }
}

fn malformed(msg: impl Into<String>) -> Failure {
    Failure { code: EXIT_MALFORMED, msg: msg.into() }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| malformed(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure { code: 1, msg: format!("{}: {e}", p.display()) }),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn read_graph(path: &Path) -> Result<(LabelledGraph, Annotations), Failure> {
    Ok(LabelledGraph::from_json(&read(path)?)?)
}

fn read_qbf(path: &Path) -> Result<Qbf, Failure> {
    Ok(normalize(&parse_qdimacs(&read(path)?)?, 2))
}

/// An instance file, or a plain graph turned into one from the flags.
fn load_instance(args: &SolveArgs) -> Result<ReductionOutput, Failure> {
    let text = read(&args.graph)?;
    let mut out = match ReductionOutput::from_json(&text) {
        Ok(out) => out,
        Err(_) => {
            let (g, annotations) = LabelledGraph::from_json(&text)?;
            let cops = args.cops.ok_or_else(|| malformed("a plain graph needs --cops"))?;
            let variant = match args.variant {
                VariantArg::Cr => Variant::Cr,
                VariantArg::Crp => Variant::Crp,
            };
            let spec = GameSpec::new(g, cops, variant, Start::Elective { first: Side::Cops })?;
            ReductionOutput { spec, annotations, projection: None, meta: Default::default(), warnings: Vec::new() }
        }
    };
    if let Some(c) = args.cops {
        if c != out.spec.cops {
            out.spec.cops = c;
            if let Start::Fixed { .. } = out.spec.start {
                return Err(malformed("--cops conflicts with the instance's fixed start"));
            }
        }
    }
    let first = args.first.map(Side::from).unwrap_or(out.spec.first_mover());
    let start = match (&args.start_cops, args.robber) {
        (Some(cops), Some(robber)) => Start::Fixed { cops: cops.clone(), robber, first },
        (None, None) => match &out.spec.start {
            Start::Fixed { cops, robber, .. } => Start::Fixed { cops: cops.clone(), robber: *robber, first },
            Start::Elective { .. } => Start::Elective { first },
        },
        _ => return Err(malformed("--start-cops and --robber go together")),
    };
    out.spec = out.spec.with_start(start)?;
    Ok(out)
}

fn cmd_solve(args: SolveArgs) -> Result<u8, Failure> {
    let out = load_instance(&args)?;
    let opts = SolveOptions {
        budget: args.budget.budget,
        mode: match args.mode {
            ModeArg::Reachable => SpaceMode::Reachable,
            ModeArg::Full => SpaceMode::Full,
        },
        retain: false,
    };
    let res = solver::solve(&out.spec, opts)?;
    let report = json!({
        "winner": res.winner,
        "placement": res.placement,
        "stats": res.stats,
    });
    emit(args.out.as_deref(), &serde_json::to_string_pretty(&report).expect("plain json"))?;
    Ok(match res.winner {
        Side::Cops => 0,
        Side::Robber => EXIT_ROBBER,
    })
}

fn cmd_reduce(args: ReduceArgs) -> Result<u8, Failure> {
    let first = Side::from(args.first);
    let out = match args.kind {
        ReduceKind::Cr2crp => {
            let (g, _) = read_graph(&args.input)?;
            reductions::cr_to_crp(&g, args.cops, Start::Elective { first })?
        }
        ReduceKind::Crp2cr => {
            let (g, _) = read_graph(&args.input)?;
            reductions::crp_to_cr_with(&g, args.cops, first)?
        }
        ReduceKind::Ds2crp => {
            let (g, _) = read_graph(&args.input)?;
            let k = args.k.ok_or_else(|| malformed("ds2crp needs --k"))?;
            reductions::dominating_set_to_crp_with(&g, k, first)?
        }
        ReduceKind::Qbf2crps => {
            let q = read_qbf(&args.input)?;
            let options = CrpsOptions { strict: args.strict, per_gadget_heavens: args.per_gadget_heavens };
            reductions::qbf_to_crps(&q, options)?
        }
        ReduceKind::Qbf2crp => {
            let q = read_qbf(&args.input)?;
            reductions::qbf_to_crp(&q, CrpOptions { literal_level2: args.literal_level2 })?
        }
    };
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(p) = &args.dot {
        emit(Some(p), &out.spec.graph.to_dot(&out.annotations))?;
    }
    emit(args.out.as_deref(), &out.to_json()?)?;
    Ok(0)
}

fn cmd_verify(args: VerifyArgs) -> Result<u8, Failure> {
    let cfg = SuiteConfig { seed: args.seed, budget: args.budget.budget };
    let reports = suites::run_suite(&args.suite, &cfg).map_err(|e| malformed(e.to_string()))?;
    for r in &reports {
        eprintln!("{}", r.line());
        println!("{}", serde_json::to_string(r).expect("plain json"));
    }
    Ok(if reports.iter().all(|r| r.passed) { 0 } else { 1 })
}

fn cmd_play(args: PlayArgs) -> Result<u8, Failure> {
    let out = ReductionOutput::from_json(&read(&args.input)?)?;
    let budget = args.budget.budget;
    let mut cops = strategies::by_name(&args.cops, Side::Cops, &out, args.seed, budget)?;
    let mut robber = strategies::by_name(&args.robber, Side::Robber, &out, args.seed.wrapping_add(1), budget)?;
    let t = solver::play(&out.spec, cops.as_mut(), robber.as_mut(), args.max);
    let report = json!({
        "cops": args.cops,
        "robber": args.robber,
        "seed": args.seed,
        "captured": t.captured(),
        "counters": { "cops": cops.counters(), "robber": robber.counters() },
        "transcript": t,
    });
    emit(args.out.as_deref(), &serde_json::to_string_pretty(&report).expect("plain json"))?;
    Ok(if t.captured() { 0 } else { EXIT_ROBBER })
}

fn cmd_eval(args: EvalArgs) -> Result<u8, Failure> {
    let raw = parse_qdimacs(&read(&args.input)?)?;
    println!("{}", raw.evaluate());
    Ok(0)
}

fn cmd_export(args: ExportArgs) -> Result<u8, Failure> {
    if !args.dot {
        return Err(malformed("choose an export format (--dot)"));
    }
    let text = read(&args.input)?;
    let (g, ann) = match ReductionOutput::from_json(&text) {
        Ok(out) => (out.spec.graph, out.annotations),
        Err(_) => LabelledGraph::from_json(&text)?,
    };
    emit(args.out.as_deref(), &g.to_dot(&ann))?;
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Reduce(a) => cmd_reduce(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Play(a) => cmd_play(a),
        Command::EvalQbf(a) => cmd_eval(a),
        Command::Export(a) => cmd_export(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
