use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::relaxation::relaxed_fixpoint;
use crate::model::{GroundState, GroundTask};
use crate::num::CostScalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeuristicKind {
    /// Number of unsatisfied goal atoms ("Hamming" distance to the goal).
    GoalCount,
    HAdd,
    HMax,
    /// Fact landmarks found by delete-relaxed backchaining.
    LmCount,
}

impl HeuristicKind {
    pub const ALL: [HeuristicKind; 4] = [
        HeuristicKind::GoalCount,
        HeuristicKind::HMax,
        HeuristicKind::HAdd,
        HeuristicKind::LmCount,
    ];

    pub fn name(self) -> &'static str {
        match self {
            HeuristicKind::GoalCount => "goalcount",
            HeuristicKind::HAdd => "hadd",
            HeuristicKind::HMax => "hmax",
            HeuristicKind::LmCount => "lmcount",
        }
    }
}

impl fmt::Display for HeuristicKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for HeuristicKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "goalcount" | "hamming" => Ok(HeuristicKind::GoalCount),
            "hadd" => Ok(HeuristicKind::HAdd),
            "hmax" => Ok(HeuristicKind::HMax),
            "lmcount" | "landmark" => Ok(HeuristicKind::LmCount),
            other => Err(format!("unknown heuristic `{other}`")),
        }
    }
}

/// Estimated cost-to-go from `state`; `C::infinity()` marks a dead end.
/// Every heuristic is 0 at a goal state.
pub fn heuristic_value<C: CostScalar>(
    task: &GroundTask<C>,
    state: &GroundState,
    kind: HeuristicKind,
) -> C {
    match kind {
        HeuristicKind::GoalCount => goal_count(task, state),
        HeuristicKind::HMax => relaxed_cost(task, state, false),
        HeuristicKind::HAdd => relaxed_cost(task, state, true),
        HeuristicKind::LmCount => landmark_count(task, state),
    }
}

fn goal_count<C: CostScalar>(task: &GroundTask<C>, state: &GroundState) -> C {
    let unsatisfied = task.goal.iter().filter(|&&g| !state.contains(g)).count()
        + task
            .negative_goal
            .iter()
            .filter(|&&g| state.contains(g))
            .count();
    C::from(unsatisfied).unwrap_or_else(C::infinity)
}

/// Cost fixpoint of the delete relaxation, aggregating preconditions by sum
/// (`additive`) or max.
pub(crate) fn atom_costs<C: CostScalar>(
    task: &GroundTask<C>,
    state: &GroundState,
    additive: bool,
) -> Vec<C> {
    let mut cost = vec![C::infinity(); task.atom_count()];
    for i in state.iter() {
        cost[i] = C::zero();
    }
    loop {
        let mut changed = false;
        for action in task.actions() {
            let mut pre = C::zero();
            for &p in &action.preconditions {
                let c = cost[p];
                if c.is_infinite_cost() {
                    pre = C::infinity();
                    break;
                }
                pre = if additive {
                    pre.add_cost(c)
                } else if c > pre {
                    c
                } else {
                    pre
                };
            }
            if pre.is_infinite_cost() {
                continue;
            }
            let reached = pre.add_cost(action.cost);
            for &a in &action.add {
                if reached < cost[a] {
                    cost[a] = reached;
                    changed = true;
                }
            }
        }
        if !changed {
            return cost;
        }
    }
}

fn relaxed_cost<C: CostScalar>(task: &GroundTask<C>, state: &GroundState, additive: bool) -> C {
    if task.goal.iter().all(|&g| state.contains(g)) {
        return C::zero();
    }
    let cost = atom_costs(task, state, additive);
    let mut h = C::zero();
    for &g in &task.goal {
        let c = cost[g];
        if c.is_infinite_cost() {
            return C::infinity();
        }
        h = if additive {
            h.add_cost(c)
        } else if c > h {
            c
        } else {
            h
        };
    }
    h
}

/// Fact landmarks of the delete relaxation from `state`: atoms not yet true
/// that every relaxed plan must achieve. `None` when the goal is relaxed
/// unreachable.
pub fn fact_landmarks<C: CostScalar>(
    task: &GroundTask<C>,
    state: &GroundState,
) -> Option<BTreeSet<usize>> {
    let mut landmarks: BTreeSet<usize> = task
        .goal
        .iter()
        .copied()
        .filter(|&g| !state.contains(g))
        .collect();
    let mut queue: VecDeque<usize> = landmarks.iter().copied().collect();
    while let Some(landmark) = queue.pop_front() {
        // Everything reachable without ever adding the landmark; achievers
        // applicable there are the possible first achievers.
        let before = relaxed_fixpoint(task, state, |i| !task.actions()[i].add.contains(&landmark));
        let mut common: Option<BTreeSet<usize>> = None;
        for &a in task.achievers(landmark) {
            let action = &task.actions()[a];
            if !action.preconditions.iter().all(|&p| before.contains(p)) {
                continue;
            }
            let pre: BTreeSet<usize> = action
                .preconditions
                .iter()
                .copied()
                .filter(|&p| !state.contains(p))
                .collect();
            common = Some(match common {
                None => pre,
                Some(c) => c.intersection(&pre).copied().collect(),
            });
        }
        for p in common? {
            if landmarks.insert(p) {
                queue.push_back(p);
            }
        }
    }
    Some(landmarks)
}

/// Counts landmarks whose achiever sets are pairwise disjoint, each weighted
/// by its cheapest achiever, so no action is charged twice.
fn landmark_count<C: CostScalar>(task: &GroundTask<C>, state: &GroundState) -> C {
    let Some(landmarks) = fact_landmarks(task, state) else {
        return C::infinity();
    };
    let mut charged: HashSet<usize> = HashSet::new();
    let mut h = C::zero();
    for l in landmarks {
        let achievers = task.achievers(l);
        if achievers.iter().any(|a| charged.contains(a)) {
            continue;
        }
        charged.extend(achievers.iter().copied());
        let cheapest = achievers
            .iter()
            .map(|&a| task.actions()[a].cost)
            .fold(C::infinity(), |m, c| if c < m { c } else { m });
        h = h.add_cost(cheapest);
    }
    h
}
