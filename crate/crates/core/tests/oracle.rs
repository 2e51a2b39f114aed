use std::collections::{HashMap, VecDeque};

use planner_core::model::ground;
use planner_core::search::{Algorithm, HeuristicKind, Limits, Status};
use planner_core::{parse_domain, parse_problem, solve, validate_plan};
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct RandomAction {
    pre: u16,
    neg_pre: u16,
    add: u16,
    del: u16,
}

#[derive(Debug, Clone)]
struct RandomTask {
    atoms: usize,
    actions: Vec<RandomAction>,
    init: u16,
    goal: u16,
    neg_goal: u16,
}

fn literals(mask: u16, atoms: usize, negated: bool) -> Vec<String> {
    (0..atoms)
        .filter(|i| mask & (1 << i) != 0)
        .map(|i| if negated { format!("(not (p{i}))") } else { format!("(p{i})") })
        .collect()
}

impl RandomTask {
    fn pddl(&self) -> (String, String) {
        let preds: String = (0..self.atoms).map(|i| format!("(p{i}) ")).collect();
        let mut domain = format!(
            "(define (domain rnd) (:requirements :strips :negative-preconditions) (:predicates {preds})\n"
        );
        for (k, a) in self.actions.iter().enumerate() {
            let mut pre = literals(a.pre, self.atoms, false);
            pre.extend(literals(a.neg_pre, self.atoms, true));
            let mut eff = literals(a.add, self.atoms, false);
            eff.extend(literals(a.del & !a.add, self.atoms, true));
            domain.push_str(&format!(
                "(:action a{k} :parameters () :precondition (and {}) :effect (and {}))\n",
                pre.join(" "),
                eff.join(" ")
            ));
        }
        domain.push(')');
        let mut goal = literals(self.goal, self.atoms, false);
        goal.extend(literals(self.neg_goal, self.atoms, true));
        let problem = format!(
            "(define (problem r) (:domain rnd) (:init {}) (:goal (and {})))",
            literals(self.init, self.atoms, false).join(" "),
            goal.join(" ")
        );
        (domain, problem)
    }

    /// Shortest plan length by exhaustive breadth-first enumeration of bitmask
    /// states; `None` when no reachable state satisfies the goal.
    fn shortest(&self) -> Option<usize> {
        let is_goal = |s: u16| s & self.goal == self.goal && s & self.neg_goal == 0;
        let mut dist = HashMap::from([(self.init, 0usize)]);
        let mut queue = VecDeque::from([self.init]);
        while let Some(s) = queue.pop_front() {
            if is_goal(s) {
                return Some(dist[&s]);
            }
            for a in &self.actions {
                if s & a.pre == a.pre && s & a.neg_pre == 0 {
                    let next = (s & !(a.del & !a.add)) | a.add;
                    if !dist.contains_key(&next) {
                        dist.insert(next, dist[&s] + 1);
                        queue.push_back(next);
                    }
                }
            }
        }
        None
    }
}

fn sparse_mask(atoms: usize, density: u32) -> impl Strategy<Value = u16> {
    prop::collection::vec(0u32..100, atoms).prop_map(move |v| {
        v.iter()
            .enumerate()
            .filter(|(_, x)| **x < density)
            .fold(0u16, |m, (i, _)| m | (1 << i))
    })
}

fn random_task() -> impl Strategy<Value = RandomTask> {
    (3usize..=12).prop_flat_map(|atoms| {
        let action = (
            sparse_mask(atoms, 20),
            sparse_mask(atoms, 5),
            sparse_mask(atoms, 20),
            sparse_mask(atoms, 15),
        )
            .prop_map(|(pre, neg_pre, add, del)| RandomAction {
                pre,
                neg_pre: neg_pre & !pre,
                add,
                del,
            });
        (
            prop::collection::vec(action, 1..=10),
            sparse_mask(atoms, 30),
            sparse_mask(atoms, 25),
            sparse_mask(atoms, 5),
        )
            .prop_map(move |(actions, init, goal, neg_goal)| RandomTask {
                atoms,
                actions,
                init,
                goal,
                neg_goal: neg_goal & !goal,
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn optimal_searches_match_exhaustive_enumeration(task in random_task()) {
        let (dt, pt) = task.pddl();
        let domain = parse_domain(&dt).unwrap();
        let problem = parse_problem(&pt, &domain).unwrap();
        let grounded = ground::<u32>(&domain, &problem).unwrap();
        let expected = task.shortest();
        for (algo, h) in [
            (Algorithm::Bfs, HeuristicKind::GoalCount),
            (Algorithm::AStar, HeuristicKind::HMax),
            (Algorithm::AStar, HeuristicKind::LmCount),
            (Algorithm::IdaStar, HeuristicKind::HMax),
        ] {
            let r = solve(&grounded, algo, h, Limits::unlimited());
            match expected {
                Some(len) => {
                    prop_assert_eq!(r.status, Status::Solved, "{} {}", algo, h);
                    let plan = r.plan.unwrap();
                    prop_assert_eq!(plan.len(), len, "{} {}", algo, h);
                    prop_assert!(validate_plan(&domain, &problem, &plan).is_valid());
                }
                None => prop_assert_eq!(r.status, Status::Unsolvable, "{} {}", algo, h),
            }
        }
        for algo in [Algorithm::Gbfs, Algorithm::Ehc] {
            let r = solve(&grounded, algo, HeuristicKind::HAdd, Limits::unlimited());
            if let Some(plan) = &r.plan {
                prop_assert!(validate_plan(&domain, &problem, plan).is_valid());
            }
            if expected.is_none() {
                prop_assert_ne!(r.status, Status::Solved);
            }
        }
    }

    #[test]
    fn integer_and_float_costs_agree(task in random_task()) {
        let (dt, pt) = task.pddl();
        let domain = parse_domain(&dt).unwrap();
        let problem = parse_problem(&pt, &domain).unwrap();
        let a = solve(&ground::<u32>(&domain, &problem).unwrap(), Algorithm::AStar, HeuristicKind::HMax, Limits::unlimited());
        let b = solve(&ground::<f64>(&domain, &problem).unwrap(), Algorithm::AStar, HeuristicKind::HMax, Limits::unlimited());
        prop_assert_eq!(a.status, b.status);
        prop_assert_eq!(a.plan, b.plan);
        prop_assert_eq!(a.expansions, b.expansions);
        prop_assert_eq!(a.cost.map(f64::from), b.cost);
    }

    #[test]
    fn heuristics_vanish_at_goal_and_hmax_is_admissible(task in random_task()) {
        let (dt, pt) = task.pddl();
        let domain = parse_domain(&dt).unwrap();
        let problem = parse_problem(&pt, &domain).unwrap();
        let grounded = ground::<u32>(&domain, &problem).unwrap();
        let expected = task.shortest();
        for h in [HeuristicKind::HMax, HeuristicKind::LmCount] {
            let v = planner_core::search::heuristic_value(&grounded, &grounded.init, h);
            if let Some(len) = expected {
                prop_assert!(v as usize <= len, "{} = {} > {}", h, v, len);
            }
            if expected == Some(0) {
                prop_assert_eq!(v, 0);
            }
        }
    }
}
