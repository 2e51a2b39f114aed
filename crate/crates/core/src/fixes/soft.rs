use std::time::Duration;

use super::FixError;
use crate::model::GroundTask;
use crate::num::CostScalar;
use crate::search::{solve, Algorithm, HeuristicKind, Limits, SearchResult, Status};

/// Soft goals are compiled by enumerating subsets, so their number is capped.
pub const MAX_SOFT_GOALS: usize = 4;

#[derive(Debug, Clone)]
pub struct SoftGoalSolution<C> {
    /// The chosen run; counters and wall time are summed over all subset runs.
    pub result: SearchResult<C>,
    /// Plan cost plus penalties of soft goals unmet at the end.
    pub total_cost: Option<C>,
    /// Indices into `task.soft_goals` that were enforced as hard goals.
    pub enforced: Vec<usize>,
    pub subsets_tried: usize,
}

/// Minimises `plan cost + Σ penalties of unmet soft goals` by solving the hard
/// goal together with each subset of soft goals (empty subset first) and
/// keeping the cheapest plan. Ties keep the earlier subset.
///
/// With no soft goals this is a single [`solve`] call.
pub fn solve_with_soft_goals<C: CostScalar>(
    task: &GroundTask<C>,
    algorithm: Algorithm,
    heuristic: HeuristicKind,
    limits: Limits,
) -> Result<SoftGoalSolution<C>, FixError> {
    let n = task.soft_goals.len();
    if n > MAX_SOFT_GOALS {
        return Err(FixError::TooManySoftGoals {
            max: MAX_SOFT_GOALS,
            found: n,
        });
    }
    let mut best: Option<(SearchResult<C>, C, Vec<usize>)> = None;
    let mut hard: Option<SearchResult<C>> = None;
    let (mut expansions, mut generated, mut wall) = (0u64, 0u64, Duration::ZERO);
    for mask in 0u32..(1 << n) {
        let enforced: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let mut goal = task.goal.clone();
        goal.extend(enforced.iter().map(|&i| task.soft_goals[i].atom));
        goal.sort_unstable();
        goal.dedup();
        let sub = task.with_goal(goal, task.negative_goal.clone());
        let result = solve(&sub, algorithm, heuristic, limits);
        expansions += result.expansions;
        generated += result.generated;
        wall += result.wall_time;
        if result.status == Status::Solved {
            let plan = result.plan.as_ref().expect("solved has plan");
            let end = task.replay(plan).expect("search plans replay");
            let penalty = task
                .soft_goals
                .iter()
                .filter(|s| !end.contains(s.atom))
                .fold(C::zero(), |acc, s| acc.add_cost(s.penalty));
            let total = result.cost.expect("solved has cost").add_cost(penalty);
            if best.as_ref().is_none_or(|(_, c, _)| total < *c) {
                best = Some((result.clone(), total, enforced));
            }
        }
        if mask == 0 && result.status != Status::Solved {
            hard = Some(result);
            break;
        }
    }
    let subsets_tried = if hard.is_some() { 1 } else { 1 << n };
    let (mut result, total_cost, enforced) = match (best, hard) {
        (Some((r, c, e)), _) => (r, Some(c), e),
        (None, Some(r)) => (r, None, Vec::new()),
        (None, None) => unreachable!("the empty subset always runs"),
    };
    result.expansions = expansions;
    result.generated = generated;
    result.wall_time = wall;
    Ok(SoftGoalSolution {
        result,
        total_cost,
        enforced,
        subsets_tried,
    })
}
