//! `plan`: classical planning with an optional advisor and a persistent cache.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 unsolvable or invalid plan,
//! 3 search limit reached.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use planner_core::search::{Algorithm, HeuristicKind, Limits};
use planner_core::parser::parse_soft_goals;
use planner_core::{parse_domain, parse_problem, validate_plan, Domain, Plan, Problem};
use planner_hybrid::advisor::AdvisorBackend;
use planner_hybrid::benchmarks::{load_benchmark, run_ablation, BENCHMARK_NAMES};
use planner_hybrid::{HttpAdvisor, HybridPlanner, PlanCache, PlannerConfig, ScriptedAdvisor, Source};

const EXIT_ERROR: u8 = 1;
const EXIT_NO_PLAN: u8 = 2;
const EXIT_TIMEOUT: u8 = 3;

#[derive(Parser)]
#[command(name = "plan", version, about = "STRIPS planner with advisor-guided repair and plan caching")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem and print the plan, one action per line.
    Solve(SolveArgs),
    /// Check a plan against a domain and problem.
    Validate(ValidateArgs),
    /// Run a bundled benchmark or its ablation.
    Bench {
        name: String,
        #[arg(long)]
        ablation: bool,
    },
    /// Inspect or empty a plan cache.
    Cache {
        #[command(subcommand)]
        action: CacheAction,
    },
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    domain: PathBuf,
    #[arg(long)]
    problem: PathBuf,
    /// `{"soft_goals": [{"atom": ..., "penalty": ...}]}`.
    #[arg(long)]
    soft_goals: Option<PathBuf>,
    #[arg(long, default_value = "astar")]
    algo: Algorithm,
    #[arg(long, default_value = "hmax")]
    heuristic: HeuristicKind,
    /// `off`, `http`, or `scripted:FILE`.
    #[arg(long, default_value = "off")]
    advisor: String,
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Write the decision trace as JSON lines.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    max_expansions: Option<u64>,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    timeout: Option<f64>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    domain: PathBuf,
    #[arg(long)]
    problem: PathBuf,
    #[arg(long)]
    plan: PathBuf,
    #[arg(long)]
    soft_goals: Option<PathBuf>,
}

#[derive(Subcommand)]
enum CacheAction {
    /// Print every record as a JSON line.
    Ls {
        #[arg(long)]
        cache: PathBuf,
    },
    Clear {
        #[arg(long)]
        cache: PathBuf,
    },
}

struct Failure(u8, String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(EXIT_ERROR, e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure(EXIT_ERROR, format!("{}: {e}", path.display())))
}

fn load_task(domain: &Path, problem: &Path, soft: Option<&Path>) -> Result<(Domain, Problem), Failure> {
    let d = parse_domain(&read(domain)?).map_err(|e| Failure(EXIT_ERROR, format!("{}: {e}", domain.display())))?;
    let mut p =
        parse_problem(&read(problem)?, &d).map_err(|e| Failure(EXIT_ERROR, format!("{}: {e}", problem.display())))?;
    if let Some(path) = soft {
        let goals = parse_soft_goals(&read(path)?).map_err(|e| Failure(EXIT_ERROR, format!("{}: {e}", path.display())))?;
        p.soft_goals.extend(goals);
        p.validate(&d)?;
    }
    Ok((d, p))
}

fn advisor(spec: &str) -> Result<Option<Arc<dyn AdvisorBackend>>, Failure> {
    match spec {
        "off" => Ok(None),
        "http" => Ok(Some(Arc::new(HttpAdvisor::from_env()?))),
        other => match other.strip_prefix("scripted:") {
            Some(path) => Ok(Some(Arc::new(ScriptedAdvisor::from_file(path)?))),
            None => Err(Failure(EXIT_ERROR, format!("unknown advisor `{other}`"))),
        },
    }
}

fn solve(args: SolveArgs) -> Result<(), Failure> {
    let (domain, problem) = load_task(&args.domain, &args.problem, args.soft_goals.as_deref())?;
    let mut limits = Limits::default();
    if let Some(n) = args.max_expansions {
        limits.max_expansions = Some(n);
    }
    if let Some(s) = args.timeout {
        let t = Duration::try_from_secs_f64(s).map_err(|e| Failure(EXIT_ERROR, format!("--timeout: {e}")))?;
        limits.timeout = Some(t);
    }
    let planner = HybridPlanner::new(PlannerConfig {
        algorithm: args.algo,
        heuristic: args.heuristic,
        limits,
        advisor: advisor(&args.advisor)?,
        cache_dir: args.cache,
        ..PlannerConfig::default()
    })?;
    let outcome = planner.get_plan(&domain, &problem)?;
    for event in &outcome.trace.events {
        log::debug!("{}", serde_json::to_string(event).unwrap_or_default());
    }
    if let Some(path) = &args.trace {
        fs::write(path, outcome.trace.to_jsonl()).map_err(|e| Failure(EXIT_ERROR, format!("{}: {e}", path.display())))?;
    }
    eprintln!("signature {}", outcome.signature);
    eprintln!("source {}", outcome.source);
    match (outcome.plan, outcome.source) {
        (Some(plan), _) => {
            print!("{}", plan.to_text());
            eprintln!("{} steps", plan.len());
            Ok(())
        }
        (None, Source::Timeout) => Err(Failure(EXIT_TIMEOUT, "search limit reached".into())),
        (None, source) => Err(Failure(EXIT_NO_PLAN, format!("no plan ({source})"))),
    }
}

fn validate(args: ValidateArgs) -> Result<(), Failure> {
    let (domain, problem) = load_task(&args.domain, &args.problem, args.soft_goals.as_deref())?;
    let plan = Plan::parse(&read(&args.plan)?).map_err(|e| Failure(EXIT_ERROR, format!("{}: {e}", args.plan.display())))?;
    let verdict = validate_plan(&domain, &problem, &plan);
    eprintln!("{verdict}");
    if let Some(cost) = verdict.cost {
        eprintln!("cost {cost}");
    }
    if verdict.is_valid() {
        Ok(())
    } else {
        Err(Failure(EXIT_NO_PLAN, "plan rejected".into()))
    }
}

fn bench(name: &str, ablation: bool) -> Result<(), Failure> {
    if ablation {
        let ablation_name = match name {
            "beer" => "beer-softgoal",
            "cube" => "cube-preconditions",
            other => other,
        };
        println!("{}", run_ablation(ablation_name)?);
        return Ok(());
    }
    let b = load_benchmark(name).map_err(|e| {
        Failure(EXIT_ERROR, format!("{e}; available: {}", BENCHMARK_NAMES.join(", ")))
    })?;
    let planner = HybridPlanner::new(PlannerConfig {
        advisor: Some(Arc::new(b.fixtures.clone())),
        ..PlannerConfig::default()
    })?;
    let outcome = planner.get_plan(&b.domain, &b.problem_with_soft_goals())?;
    eprintln!("{name}: source {}", outcome.source);
    match outcome.plan {
        Some(plan) => {
            print!("{}", plan.to_text());
            Ok(())
        }
        None => Err(Failure(EXIT_NO_PLAN, format!("no plan ({})", outcome.source))),
    }
}

fn cache(action: CacheAction) -> Result<(), Failure> {
    match action {
        CacheAction::Ls { cache } => {
            let store = PlanCache::open(&cache)?;
            for record in store.plans() {
                println!("{}", serde_json::to_string(&record)?);
            }
            for record in store.flaws() {
                println!("{}", serde_json::to_string(&record)?);
            }
        }
        CacheAction::Clear { cache } => PlanCache::open(&cache)?.clear()?,
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_ERROR) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Solve(args) => solve(args),
        Command::Validate(args) => validate(args),
        Command::Bench { name, ablation } => bench(&name, ablation),
        Command::Cache { action } => cache(action),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(code, message)) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}
