//! Bundled benchmark tasks and the ablation harness.

use std::collections::BTreeMap;
use std::fmt;
use std::time::{Duration, Instant};

use planner_core::fixes::solve_with_soft_goals;
use planner_core::model::SoftGoal;
use planner_core::parser::parse_soft_goals;
use planner_core::search::{Algorithm, HeuristicKind, Limits};
use planner_core::{
    apply_fixes, ground, parse_domain, parse_fix, parse_problem, validate_plan, Domain, DomainFix,
    ParseError, Plan, Problem,
};
use serde::Serialize;
use thiserror::Error;

use crate::advisor::{AdvisorError, ScriptedAdvisor};

pub const BENCHMARK_NAMES: [&str; 5] = [
    "beer",
    "microwave-flawed",
    "microwave-fixed",
    "cube",
    "cube-augmented",
];

pub const ABLATION_NAMES: [&str; 2] = ["beer-softgoal", "cube-preconditions"];

struct Assets {
    domain: &'static str,
    problem: &'static str,
    soft_goals: Option<&'static str>,
    fixtures: &'static str,
    golden: &'static [(&'static str, &'static str)],
}

macro_rules! asset {
    ($path:literal) => {
        include_str!(concat!("../../../benchmarks/", $path))
    };
}

fn assets(name: &str) -> Option<Assets> {
    Some(match name {
        "beer" => Assets {
            domain: asset!("beer/domain.pddl"),
            problem: asset!("beer/problem.pddl"),
            soft_goals: Some(asset!("beer/soft_goals.json")),
            fixtures: asset!("beer/fixtures.json"),
            golden: &[
                ("enhsp", asset!("beer/golden/enhsp.plan")),
                ("fast-downward", asset!("beer/golden/fast-downward.plan")),
                ("llm", asset!("beer/golden/llm.plan")),
            ],
        },
        "microwave-flawed" => Assets {
            domain: asset!("microwave-flawed/domain.pddl"),
            problem: asset!("microwave-flawed/problem.pddl"),
            soft_goals: None,
            fixtures: asset!("microwave-flawed/fixtures.json"),
            golden: &[],
        },
        "microwave-fixed" => Assets {
            domain: asset!("microwave-fixed/domain.pddl"),
            problem: asset!("microwave-fixed/problem.pddl"),
            soft_goals: None,
            fixtures: asset!("microwave-fixed/fixtures.json"),
            golden: &[("heat-soup", asset!("microwave-fixed/golden/heat-soup.plan"))],
        },
        "cube" => Assets {
            domain: asset!("cube/domain.pddl"),
            problem: asset!("cube/problem.pddl"),
            soft_goals: None,
            fixtures: asset!("cube/fixtures.json"),
            golden: &[("canonical", asset!("cube/golden/canonical.plan"))],
        },
        "cube-augmented" => Assets {
            domain: asset!("cube-augmented/domain.pddl"),
            problem: asset!("cube-augmented/problem.pddl"),
            soft_goals: None,
            fixtures: asset!("cube-augmented/fixtures.json"),
            golden: &[("canonical", asset!("cube-augmented/golden/canonical.plan"))],
        },
        _ => return None,
    })
}

/// The five pipeline preconditions for the cube domain.
pub const CUBE_PRECONDITIONS_FIX: &str = asset!("cube/preconditions_fix.json");

#[derive(Debug, Error)]
pub enum BenchmarkError {
    #[error("unknown benchmark `{0}`")]
    Unknown(String),
    #[error("{name}: {source}")]
    Parse {
        name: String,
        #[source]
        source: ParseError,
    },
    #[error("{name}: fixtures: {source}")]
    Fixtures {
        name: String,
        #[source]
        source: AdvisorError,
    },
    #[error("{name}: golden plan `{plan}` is invalid: {reason}")]
    Golden {
        name: String,
        plan: String,
        reason: String,
    },
    #[error("{0}")]
    Ablation(String),
}

#[derive(Debug, Clone)]
pub struct Benchmark {
    pub name: String,
    pub domain: Domain,
    /// The problem without its soft-goal sidecar.
    pub problem: Problem,
    pub soft_goals: Vec<SoftGoal>,
    pub fixtures: ScriptedAdvisor,
    pub golden: BTreeMap<String, Plan>,
    pub domain_text: &'static str,
    pub problem_text: &'static str,
}

impl Benchmark {
    /// The problem with the sidecar soft goals attached.
    pub fn problem_with_soft_goals(&self) -> Problem {
        let mut p = self.problem.clone();
        p.soft_goals = self.soft_goals.clone();
        p
    }
}

pub fn load_benchmark(name: &str) -> Result<Benchmark, BenchmarkError> {
    let a = assets(name).ok_or_else(|| BenchmarkError::Unknown(name.to_string()))?;
    let parse_err = |source| BenchmarkError::Parse {
        name: name.to_string(),
        source,
    };
    let domain = parse_domain(a.domain).map_err(parse_err)?;
    let problem = parse_problem(a.problem, &domain).map_err(parse_err)?;
    let soft_goals = a
        .soft_goals
        .map(parse_soft_goals)
        .transpose()
        .map_err(parse_err)?
        .unwrap_or_default();
    let fixtures = ScriptedAdvisor::from_json(a.fixtures).map_err(|source| BenchmarkError::Fixtures {
        name: name.to_string(),
        source,
    })?;
    let mut golden = BTreeMap::new();
    for (plan_name, text) in a.golden {
        let golden_err = |reason: String| BenchmarkError::Golden {
            name: name.to_string(),
            plan: plan_name.to_string(),
            reason,
        };
        let plan = Plan::parse(text).map_err(|e| golden_err(e.to_string()))?;
        let verdict = validate_plan(&domain, &problem, &plan);
        if !verdict.is_valid() {
            return Err(golden_err(verdict.to_string()));
        }
        golden.insert(plan_name.to_string(), plan);
    }
    Ok(Benchmark {
        name: name.to_string(),
        domain,
        problem,
        soft_goals,
        fixtures,
        golden,
        domain_text: a.domain,
        problem_text: a.problem,
    })
}

pub fn cube_preconditions_fix() -> DomainFix {
    parse_fix(CUBE_PRECONDITIONS_FIX).expect("bundled fix parses")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationRow {
    pub label: String,
    pub plan_length: usize,
    pub plan_cost: Option<f64>,
    pub expansions: u64,
    pub wall_time: Duration,
    pub plan: Plan,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationReport {
    pub name: String,
    pub rows: Vec<AblationRow>,
    /// Expansions of the last row over the first.
    pub expansion_ratio: f64,
    /// Wall time of the last row over the first.
    pub time_ratio: f64,
}

impl fmt::Display for AblationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ablation: {}", self.name)?;
        writeln!(
            f,
            "{:<38} {:>6} {:>8} {:>11} {:>12}",
            "configuration", "length", "cost", "expansions", "time (ms)"
        )?;
        for row in &self.rows {
            let cost = row.plan_cost.map_or("-".to_string(), |c| format!("{c}"));
            writeln!(
                f,
                "{:<38} {:>6} {:>8} {:>11} {:>12.3}",
                row.label,
                row.plan_length,
                cost,
                row.expansions,
                row.wall_time.as_secs_f64() * 1e3
            )?;
        }
        writeln!(f, "expansion ratio (last/first): {:.4}", self.expansion_ratio)?;
        write!(f, "time ratio (last/first): {:.4}", self.time_ratio)
    }
}

fn measure(
    label: String,
    domain: &Domain,
    problem: &Problem,
    limits: Limits,
) -> Result<AblationRow, BenchmarkError> {
    let start = Instant::now();
    let task = ground(domain, problem).map_err(|e| BenchmarkError::Ablation(e.to_string()))?;
    let solution = solve_with_soft_goals(&task, Algorithm::AStar, HeuristicKind::HMax, limits)
        .map_err(|e| BenchmarkError::Ablation(e.to_string()))?;
    let wall_time = start.elapsed();
    let plan = solution
        .result
        .plan
        .ok_or_else(|| BenchmarkError::Ablation(format!("{label}: {}", solution.result.status)))?;
    Ok(AblationRow {
        label,
        plan_length: plan.len(),
        plan_cost: solution.total_cost.map(f64::from),
        expansions: solution.result.expansions,
        wall_time,
        plan,
    })
}

fn report(name: &str, rows: Vec<AblationRow>) -> AblationReport {
    let (first, last) = (&rows[0], &rows[rows.len() - 1]);
    let expansion_ratio = last.expansions as f64 / first.expansions.max(1) as f64;
    let time_ratio = last.wall_time.as_secs_f64() / first.wall_time.as_secs_f64().max(1e-9);
    AblationReport {
        name: name.to_string(),
        rows,
        expansion_ratio,
        time_ratio,
    }
}

/// Beer task solved without soft goals and with `fridge-closed` as a soft
/// goal at each of `penalties`.
pub fn beer_softgoal_ablation(penalties: &[f64]) -> Result<AblationReport, BenchmarkError> {
    let beer = load_benchmark("beer")?;
    let mut rows = vec![measure(
        "hard goal only".into(),
        &beer.domain,
        &beer.problem,
        Limits::default(),
    )?];
    let soft = beer
        .soft_goals
        .first()
        .cloned()
        .ok_or_else(|| BenchmarkError::Ablation("beer has no soft goal".into()))?;
    for &penalty in penalties {
        let mut problem = beer.problem.clone();
        problem.soft_goals = vec![SoftGoal {
            atom: soft.atom.clone(),
            penalty,
        }];
        rows.push(measure(
            format!("soft {} penalty {penalty}", soft.atom),
            &beer.domain,
            &problem,
            Limits::default(),
        )?);
    }
    Ok(report("beer-softgoal", rows))
}

/// Cube task before and after compiling in the five pipeline preconditions.
pub fn cube_preconditions_ablation() -> Result<AblationReport, BenchmarkError> {
    let cube = load_benchmark("cube")?;
    let (domain, problem) = apply_fixes(&cube.domain, &cube.problem, &cube_preconditions_fix())
        .map_err(|e| BenchmarkError::Ablation(e.to_string()))?;
    let rows = vec![
        measure("original domain".into(), &cube.domain, &cube.problem, Limits::default())?,
        measure("with five preconditions".into(), &domain, &problem, Limits::default())?,
    ];
    Ok(report("cube-preconditions", rows))
}

pub fn run_ablation(name: &str) -> Result<AblationReport, BenchmarkError> {
    match name {
        "beer-softgoal" => beer_softgoal_ablation(&[0.0, 2.0]),
        "cube-preconditions" => cube_preconditions_ablation(),
        other => Err(BenchmarkError::Unknown(other.to_string())),
    }
}
