//! Classical solvers over a [`GroundTask`]: blind and heuristic search with
//! expansion counters, plus unsolvability certificates.

mod algorithms;
mod heuristics;
mod relaxation;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::model::GroundTask;
use crate::num::CostScalar;
use crate::plan::{Plan, PlanStep};

pub use heuristics::{fact_landmarks, heuristic_value, HeuristicKind};
pub use relaxation::{
    relaxed_reachability, OrphanPrecondition, Reachability, UnsolvabilityCertificate,
};

pub const DEFAULT_MAX_EXPANSIONS: u64 = 1_000_000;
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Bfs,
    IdaStar,
    AStar,
    Gbfs,
    Ehc,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Bfs,
        Algorithm::IdaStar,
        Algorithm::AStar,
        Algorithm::Gbfs,
        Algorithm::Ehc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Bfs => "bfs",
            Algorithm::IdaStar => "idastar",
            Algorithm::AStar => "astar",
            Algorithm::Gbfs => "gbfs",
            Algorithm::Ehc => "ehc",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "bfs" => Ok(Algorithm::Bfs),
            "idastar" | "ida*" => Ok(Algorithm::IdaStar),
            "astar" | "a*" => Ok(Algorithm::AStar),
            "gbfs" => Ok(Algorithm::Gbfs),
            "ehc" => Ok(Algorithm::Ehc),
            other => Err(format!("unknown algorithm `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Solved,
    Unsolvable,
    Timeout,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Solved => "SOLVED",
            Status::Unsolvable => "UNSOLVABLE",
            Status::Timeout => "TIMEOUT",
        })
    }
}

/// Search budget; `None` means unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    pub max_expansions: Option<u64>,
    pub timeout: Option<Duration>,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_expansions: Some(DEFAULT_MAX_EXPANSIONS),
            timeout: Some(DEFAULT_TIMEOUT),
        }
    }
}

impl Limits {
    pub fn unlimited() -> Self {
        Limits {
            max_expansions: None,
            timeout: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SearchResult<C> {
    pub status: Status,
    pub plan: Option<Plan>,
    pub cost: Option<C>,
    pub expansions: u64,
    pub generated: u64,
    pub wall_time: Duration,
    pub certificate: Option<UnsolvabilityCertificate>,
    /// Why the search stopped without a verdict (limits, EHC dead end).
    pub reason: Option<String>,
}

impl<C> SearchResult<C> {
    pub fn is_solved(&self) -> bool {
        self.status == Status::Solved
    }
}

/// How an algorithm run ended, before plan reconstruction.
pub(crate) enum Outcome {
    Found(Vec<usize>),
    Exhausted,
    Stopped(String),
}

pub(crate) struct Budget {
    limits: Limits,
    started: Instant,
    pub expansions: u64,
    pub generated: u64,
}

impl Budget {
    fn new(limits: Limits) -> Self {
        Budget {
            limits,
            started: Instant::now(),
            expansions: 0,
            generated: 0,
        }
    }

    /// Counts one expansion; returns the reason when the budget is spent.
    pub fn expand(&mut self) -> Option<String> {
        if let Some(max) = self.limits.max_expansions {
            if self.expansions >= max {
                return Some(format!("expansion limit {max} reached"));
            }
        }
        if let Some(timeout) = self.limits.timeout {
            if self.expansions.is_multiple_of(256) && self.started.elapsed() >= timeout {
                return Some(format!("timeout after {:.1}s", timeout.as_secs_f64()));
            }
        }
        self.expansions += 1;
        None
    }
}

/// Runs `algorithm` on `task`. The heuristic is ignored by `bfs`.
///
/// A goal-satisfying initial state returns the empty plan without expanding
/// anything. A relaxation certificate short-circuits search with a definitive
/// `UNSOLVABLE`.
pub fn solve<C: CostScalar>(
    task: &GroundTask<C>,
    algorithm: Algorithm,
    heuristic: HeuristicKind,
    limits: Limits,
) -> SearchResult<C> {
    let started = Instant::now();
    let mut budget = Budget::new(limits);
    let outcome = if task.is_goal(&task.init) {
        Outcome::Found(Vec::new())
    } else if let Some(certificate) = relaxed_reachability(task).certificate {
        return SearchResult {
            status: Status::Unsolvable,
            plan: None,
            cost: None,
            expansions: 0,
            generated: 0,
            wall_time: started.elapsed(),
            certificate: Some(certificate),
            reason: None,
        };
    } else {
        match algorithm {
            Algorithm::Bfs => algorithms::breadth_first(task, &mut budget),
            Algorithm::AStar => algorithms::best_first(task, heuristic, true, &mut budget),
            Algorithm::Gbfs => algorithms::best_first(task, heuristic, false, &mut budget),
            Algorithm::IdaStar => algorithms::ida_star(task, heuristic, &mut budget),
            Algorithm::Ehc => algorithms::enforced_hill_climbing(task, heuristic, &mut budget),
        }
    };
    let mut result = SearchResult {
        status: Status::Timeout,
        plan: None,
        cost: None,
        expansions: budget.expansions,
        generated: budget.generated,
        wall_time: Duration::ZERO,
        certificate: None,
        reason: None,
    };
    match outcome {
        Outcome::Found(actions) => {
            let steps = actions
                .iter()
                .map(|&a| {
                    let action = &task.actions()[a];
                    PlanStep::new(action.name.clone(), action.args.iter().cloned())
                })
                .collect();
            let cost = actions
                .iter()
                .fold(C::zero(), |acc, &a| acc.add_cost(task.actions()[a].cost));
            result.status = Status::Solved;
            result.plan = Some(Plan::new(steps));
            result.cost = Some(cost);
        }
        Outcome::Exhausted => {
            result.status = Status::Unsolvable;
            result.certificate = Some(relaxation::exhausted_certificate(task));
        }
        Outcome::Stopped(reason) => result.reason = Some(reason),
    }
    result.wall_time = started.elapsed();
    result
}
