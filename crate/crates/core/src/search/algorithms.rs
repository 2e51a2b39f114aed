use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap, HashSet, VecDeque};

use super::heuristics::heuristic_value;
use super::{Budget, HeuristicKind, Outcome};
use crate::model::{GroundState, GroundTask};
use crate::num::CostScalar;

struct Node<C> {
    state: GroundState,
    parent: Option<usize>,
    action: Option<usize>,
    g: C,
}

fn extract_path<C>(nodes: &[Node<C>], mut id: usize) -> Vec<usize> {
    let mut actions = Vec::new();
    while let Some(a) = nodes[id].action {
        actions.push(a);
        id = nodes[id].parent.expect("non-root node has a parent");
    }
    actions.reverse();
    actions
}

/// Open-list key: primary, then secondary, then insertion order.
struct Key<C> {
    primary: C,
    secondary: C,
    seq: u64,
    node: usize,
}

impl<C: CostScalar> PartialEq for Key<C> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<C: CostScalar> Eq for Key<C> {}

impl<C: CostScalar> PartialOrd for Key<C> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<C: CostScalar> Ord for Key<C> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.primary
            .cmp_cost(&other.primary)
            .then_with(|| self.secondary.cmp_cost(&other.secondary))
            .then_with(|| self.seq.cmp(&other.seq))
    }
}

/// A* (`optimal`: f = g + h, ties to lower h, then FIFO, with reopening) or
/// greedy best-first (h, then FIFO, no reopening).
pub(crate) fn best_first<C: CostScalar>(
    task: &GroundTask<C>,
    heuristic: HeuristicKind,
    optimal: bool,
    budget: &mut Budget,
) -> Outcome {
    let mut nodes = vec![Node {
        state: task.init.clone(),
        parent: None,
        action: None,
        g: C::zero(),
    }];
    let mut best_g: HashMap<GroundState, C> = HashMap::new();
    best_g.insert(task.init.clone(), C::zero());
    let mut closed: HashSet<GroundState> = HashSet::new();
    let mut open = BinaryHeap::new();
    let mut seq = 0u64;
    let h0 = heuristic_value(task, &task.init, heuristic);
    if h0.is_infinite_cost() {
        return Outcome::Exhausted;
    }
    let key = |g: C, h: C, seq: u64, node: usize| {
        if optimal {
            Key {
                primary: g.add_cost(h),
                secondary: h,
                seq,
                node,
            }
        } else {
            Key {
                primary: h,
                secondary: C::zero(),
                seq,
                node,
            }
        }
    };
    open.push(Reverse(key(C::zero(), h0, seq, 0)));

    while let Some(Reverse(Key { node: id, .. })) = open.pop() {
        let (g, state) = (nodes[id].g, nodes[id].state.clone());
        if optimal {
            if best_g.get(&state).is_some_and(|&best| best < g) {
                continue;
            }
        } else if !closed.insert(state.clone()) {
            continue;
        }
        if task.is_goal(&state) {
            return Outcome::Found(extract_path(&nodes, id));
        }
        if let Some(reason) = budget.expand() {
            return Outcome::Stopped(reason);
        }
        for (a, action) in task.actions().iter().enumerate() {
            if !task.applicable(&state, action) {
                continue;
            }
            let next = task.successor(&state, action);
            let next_g = g.add_cost(action.cost);
            budget.generated += 1;
            if let Some(&known) = best_g.get(&next) {
                if optimal && known <= next_g {
                    continue;
                }
                if !optimal {
                    continue;
                }
            }
            best_g.insert(next.clone(), next_g);
            let h = heuristic_value(task, &next, heuristic);
            if h.is_infinite_cost() {
                continue;
            }
            seq += 1;
            nodes.push(Node {
                state: next,
                parent: Some(id),
                action: Some(a),
                g: next_g,
            });
            open.push(Reverse(key(next_g, h, seq, nodes.len() - 1)));
        }
    }
    Outcome::Exhausted
}

/// Blind breadth-first search with duplicate detection; the goal test runs at
/// generation, so plans are length-optimal.
pub(crate) fn breadth_first<C: CostScalar>(task: &GroundTask<C>, budget: &mut Budget) -> Outcome {
    let mut nodes = vec![Node {
        state: task.init.clone(),
        parent: None,
        action: None,
        g: C::zero(),
    }];
    let mut seen: HashSet<GroundState> = HashSet::new();
    seen.insert(task.init.clone());
    let mut queue = VecDeque::from([0usize]);
    while let Some(id) = queue.pop_front() {
        if let Some(reason) = budget.expand() {
            return Outcome::Stopped(reason);
        }
        let state = nodes[id].state.clone();
        let g = nodes[id].g;
        for (a, action) in task.actions().iter().enumerate() {
            if !task.applicable(&state, action) {
                continue;
            }
            let next = task.successor(&state, action);
            budget.generated += 1;
            if !seen.insert(next.clone()) {
                continue;
            }
            let goal = task.is_goal(&next);
            nodes.push(Node {
                state: next,
                parent: Some(id),
                action: Some(a),
                g: g.add_cost(action.cost),
            });
            if goal {
                return Outcome::Found(extract_path(&nodes, nodes.len() - 1));
            }
            queue.push_back(nodes.len() - 1);
        }
    }
    Outcome::Exhausted
}

enum Probe<C> {
    Found,
    /// Smallest f that exceeded the bound, or infinity.
    Exceeded(C),
    Stopped(String),
}

struct IdaSearch<'a, C> {
    task: &'a GroundTask<C>,
    heuristic: HeuristicKind,
    path_states: HashSet<GroundState>,
    path_actions: Vec<usize>,
}

impl<C: CostScalar> IdaSearch<'_, C> {
    fn probe(&mut self, state: &GroundState, g: C, bound: C, budget: &mut Budget) -> Probe<C> {
        let h = heuristic_value(self.task, state, self.heuristic);
        if h.is_infinite_cost() {
            return Probe::Exceeded(C::infinity());
        }
        let f = g.add_cost(h);
        if f > bound {
            return Probe::Exceeded(f);
        }
        if self.task.is_goal(state) {
            return Probe::Found;
        }
        if let Some(reason) = budget.expand() {
            return Probe::Stopped(reason);
        }
        let mut next_bound = C::infinity();
        for (a, action) in self.task.actions().iter().enumerate() {
            if !self.task.applicable(state, action) {
                continue;
            }
            let next = self.task.successor(state, action);
            budget.generated += 1;
            if self.path_states.contains(&next) {
                continue;
            }
            self.path_states.insert(next.clone());
            self.path_actions.push(a);
            match self.probe(&next, g.add_cost(action.cost), bound, budget) {
                Probe::Found => return Probe::Found,
                Probe::Stopped(reason) => return Probe::Stopped(reason),
                Probe::Exceeded(f) => {
                    if f < next_bound {
                        next_bound = f;
                    }
                }
            }
            self.path_actions.pop();
            self.path_states.remove(&next);
        }
        Probe::Exceeded(next_bound)
    }
}

/// Iterative-deepening A* with cycle detection along the current path.
pub(crate) fn ida_star<C: CostScalar>(
    task: &GroundTask<C>,
    heuristic: HeuristicKind,
    budget: &mut Budget,
) -> Outcome {
    let mut search = IdaSearch {
        task,
        heuristic,
        path_states: HashSet::from([task.init.clone()]),
        path_actions: Vec::new(),
    };
    let mut bound = heuristic_value(task, &task.init, heuristic);
    loop {
        if bound.is_infinite_cost() {
            return Outcome::Exhausted;
        }
        match search.probe(&task.init, C::zero(), bound, budget) {
            Probe::Found => return Outcome::Found(search.path_actions),
            Probe::Stopped(reason) => return Outcome::Stopped(reason),
            Probe::Exceeded(next) => bound = next,
        }
    }
}

/// Enforced hill-climbing: breadth-first lookahead from the incumbent until a
/// strictly better heuristic value (or a goal) is found. No restarts.
pub(crate) fn enforced_hill_climbing<C: CostScalar>(
    task: &GroundTask<C>,
    heuristic: HeuristicKind,
    budget: &mut Budget,
) -> Outcome {
    let mut current = task.init.clone();
    let mut current_h = heuristic_value(task, &current, heuristic);
    let mut plan = Vec::new();
    if current_h.is_infinite_cost() {
        return Outcome::Stopped("ehc-dead-end".to_string());
    }
    while !task.is_goal(&current) {
        let mut nodes = vec![Node {
            state: current.clone(),
            parent: None,
            action: None,
            g: C::zero(),
        }];
        let mut seen = HashSet::from([current.clone()]);
        let mut queue = VecDeque::from([0usize]);
        let mut improved = None;
        'lookahead: while let Some(id) = queue.pop_front() {
            if let Some(reason) = budget.expand() {
                return Outcome::Stopped(reason);
            }
            let state = nodes[id].state.clone();
            for (a, action) in task.actions().iter().enumerate() {
                if !task.applicable(&state, action) {
                    continue;
                }
                let next = task.successor(&state, action);
                budget.generated += 1;
                if !seen.insert(next.clone()) {
                    continue;
                }
                let h = heuristic_value(task, &next, heuristic);
                nodes.push(Node {
                    state: next.clone(),
                    parent: Some(id),
                    action: Some(a),
                    g: C::zero(),
                });
                let node = nodes.len() - 1;
                if h < current_h || task.is_goal(&next) {
                    improved = Some((node, h));
                    break 'lookahead;
                }
                if !h.is_infinite_cost() {
                    queue.push_back(node);
                }
            }
        }
        let Some((node, h)) = improved else {
            return Outcome::Stopped("ehc-dead-end".to_string());
        };
        plan.extend(extract_path(&nodes, node));
        current = nodes[node].state.clone();
        current_h = h;
    }
    Outcome::Found(plan)
}
