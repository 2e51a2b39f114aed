mod common;

use std::collections::BTreeSet;

use common::{asset, golden, golden_names, load, BENCHMARKS};
use planner_core::model::Atom;
use planner_core::parser::parse_soft_goals;
use planner_core::search::{relaxed_reachability, Algorithm, HeuristicKind, Limits, Status};
use planner_core::{
    create_signature, ground, parse_domain, parse_problem, print_domain, print_problem, solve,
    validate_plan, Plan,
};

fn atom(text: &str) -> Atom {
    text.parse().unwrap()
}

fn schema_names(name: &str) -> BTreeSet<String> {
    load(name).0.actions.iter().map(|a| a.name.clone()).collect()
}

#[test]
fn every_bundled_file_round_trips() {
    for name in BENCHMARKS {
        let (d, p) = load(name);
        let d2 = parse_domain(&print_domain(&d)).unwrap();
        let p2 = parse_problem(&print_problem(&p), &d2).unwrap();
        assert_eq!(d2, d, "{name}");
        assert_eq!(p2, p, "{name}");
        assert_eq!(print_domain(&d2), print_domain(&d), "{name}");
        assert_eq!(create_signature(&d2, &p2), create_signature(&d, &p), "{name}");
    }
}

fn structural_close_parens(text: &str) -> Vec<usize> {
    let mut out = Vec::new();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let code = line.split(';').next().unwrap();
        out.extend(code.match_indices(')').map(|(i, _)| offset + i));
        offset += line.len();
    }
    out
}

#[test]
fn deleting_any_closing_paren_is_rejected() {
    for name in BENCHMARKS {
        for file in ["domain.pddl", "problem.pddl"] {
            let text = asset(&format!("{name}/{file}"));
            let domain = load(name).0;
            for i in structural_close_parens(&text) {
                let mut mutated = text.clone();
                mutated.remove(i);
                let rejected = if file == "domain.pddl" {
                    parse_domain(&mutated).is_err()
                } else {
                    parse_problem(&mutated, &domain).is_err()
                };
                assert!(rejected, "{name}/{file}: deleting ')' at byte {i} was accepted");
            }
        }
    }
}

#[test]
fn golden_plans_validate() {
    for name in BENCHMARKS {
        let (d, p) = load(name);
        for plan in golden_names(name) {
            let verdict = validate_plan(&d, &p, &golden(name, &plan));
            assert!(verdict.is_valid(), "{name}/{plan}: {verdict}");
        }
    }
}

#[test]
fn beer_golden_plans_and_fridge_state() {
    let (d, mut p) = load("beer");
    p.soft_goals = parse_soft_goals(&asset("beer/soft_goals.json")).unwrap();
    let fridge_closed = atom("fridge-closed(fridge)");
    let cases = [("fast-downward", 7, false), ("enhsp", 7, false), ("llm", 8, true)];
    for (plan, len, closed) in cases {
        let plan_value = golden("beer", plan);
        assert_eq!(plan_value.len(), len);
        let verdict = validate_plan(&d, &p, &plan_value);
        assert!(verdict.is_valid(), "{plan}");
        assert_eq!(verdict.soft_goals_met.contains(&fridge_closed), closed, "{plan}");
        assert_eq!(verdict.soft_goals_unmet.contains(&fridge_closed), !closed, "{plan}");
    }
    assert_eq!(golden("beer", "llm").position("close-fridge"), Some(3));
}

#[test]
fn beer_schemas_and_goal() {
    let names = schema_names("beer");
    assert_eq!(names.len(), 7);
    assert!(names.contains("close-fridge"));
    let (_, p) = load("beer");
    let goal: BTreeSet<Atom> = p.positive_goal().cloned().collect();
    assert_eq!(goal, BTreeSet::from([atom("open(beer-bottle)"), atom("on-table(beer-bottle)")]));
}

#[test]
fn beer_step_replay() {
    let (d, p) = load("beer");
    let task = ground(&d, &p).unwrap();
    let plan = golden("beer", "llm");
    let mut state = task.init.clone();
    for (i, step) in plan.steps.iter().enumerate() {
        let a = task.find_action(&step.action, &step.args).unwrap();
        let action = &task.actions()[a];
        if step.action == "pick-up-beer" {
            assert!(task.applicable(&state, action));
        }
        let next = task.apply(&state, action).unwrap_or_else(|e| panic!("step {i}: {e}"));
        if step.action == "open-fridge" {
            let open = task.index_of(&atom("fridge-open(fridge)")).unwrap();
            let closed = task.index_of(&atom("fridge-closed(fridge)")).unwrap();
            assert!(next.contains(open) && !next.contains(closed));
            assert!(state.contains(closed) && !state.contains(open));
        }
        state = next;
    }
    for goal in ["open(beer-bottle)", "on-table(beer-bottle)", "fridge-closed(fridge)"] {
        assert!(state.contains(task.index_of(&atom(goal)).unwrap()), "{goal}");
    }
}

#[test]
fn microwave_variants_differ_only_in_start_microwave() {
    let flawed = schema_names("microwave-flawed");
    let fixed = schema_names("microwave-fixed");
    assert!(!flawed.contains("start-microwave"));
    assert!(fixed.contains("start-microwave"));
    assert_eq!(fixed.difference(&flawed).collect::<Vec<_>>(), vec!["start-microwave"]);
}

#[test]
fn flawed_microwave_grounding_has_no_achiever_for_microwave_on() {
    let (d, p) = load("microwave-flawed");
    let task = ground(&d, &p).unwrap();
    let on = task.index_of(&atom("microwave-on(microwave1)")).unwrap();
    assert!(task
        .actions()
        .iter()
        .any(|a| a.name == "wait-finish" && a.preconditions.contains(&on)));
    assert!(task.actions().iter().all(|a| !a.add.contains(&on)));
    assert!(task.achievers(on).is_empty());
    let wait = task
        .actions()
        .iter()
        .find(|a| a.name == "wait-finish")
        .unwrap();
    assert!(!task.applicable(&task.init, wait));
}

#[test]
fn microwave_reachability() {
    let (d, p) = load("microwave-flawed");
    let reach = relaxed_reachability(&ground(&d, &p).unwrap());
    let cert = reach.certificate.expect("flawed microwave is unreachable");
    assert!(cert.unreachable_goal_atoms.contains(&atom("food-hot(soup-bowl)")));
    assert!(cert.names_orphan("wait-finish", &atom("microwave-on(microwave1)")));

    let (d, p) = load("microwave-fixed");
    assert!(relaxed_reachability(&ground(&d, &p).unwrap()).certificate.is_none());
}

#[test]
fn microwave_flawed_is_unsolvable_fixed_is_solvable() {
    let (d, p) = load("microwave-flawed");
    let r = solve(&ground(&d, &p).unwrap(), Algorithm::AStar, HeuristicKind::HMax, Limits::default());
    assert_eq!(r.status, Status::Unsolvable);
    assert!(r.plan.is_none());
    assert!(r
        .certificate
        .unwrap()
        .names_orphan("wait-finish", &atom("microwave-on(microwave1)")));

    let (d, p) = load("microwave-fixed");
    let r = solve(&ground(&d, &p).unwrap(), Algorithm::AStar, HeuristicKind::HMax, Limits::default());
    assert_eq!(r.status, Status::Solved);
    assert!(validate_plan(&d, &p, r.plan.as_ref().unwrap()).is_valid());
}

#[test]
fn cube_schemas_init_and_goal() {
    let expected: BTreeSet<String> = [
        "pick-up",
        "place",
        "rotate-cube",
        "inspect-cube-on-platform-a",
        "discover-black-dot",
        "identify-correct-cube",
        "mark-correctly-placed",
    ]
    .into_iter()
    .map(String::from)
    .collect();
    assert_eq!(schema_names("cube"), expected);
    assert_eq!(schema_names("cube-augmented"), expected);

    let (_, p) = load("cube");
    let init = p.init_set();
    assert!(init.contains(&atom("on-platform(cube-a,platform-a)")));
    assert!(init.contains(&atom("on-platform(cube-b,platform-a)")));
    assert!(init.iter().all(|a| a.predicate != "has-black-dot"));
    let goal: Vec<&Atom> = p.positive_goal().collect();
    assert_eq!(goal, vec![&atom("correct-cube-on-platform(cube-a,platform-b)")]);
}

#[test]
fn cube_is_add_only() {
    for name in ["cube", "cube-augmented"] {
        let (d, p) = load(name);
        let task = ground(&d, &p).unwrap();
        assert!(task.actions().iter().all(|a| a.delete.is_empty()), "{name}");
        let mut state = task.init.clone();
        for step in &golden(name, "canonical").steps {
            let a = task.find_action(&step.action, &step.args).unwrap();
            let next = task.apply(&state, &task.actions()[a]).unwrap();
            assert!(state.is_subset(&next));
            state = next;
        }
    }
}

#[test]
fn grounding_is_deterministic() {
    for name in BENCHMARKS {
        let (d, p) = load(name);
        let (a, b) = (ground(&d, &p).unwrap(), ground(&d, &p).unwrap());
        assert_eq!(a.atoms(), b.atoms());
        let labels = |t: &planner_core::Task| t.actions().iter().map(|x| x.label()).collect::<Vec<_>>();
        assert_eq!(labels(&a), labels(&b));
        let mut sorted = a.atoms().to_vec();
        sorted.sort();
        assert_eq!(sorted, a.atoms());
    }
}

fn assert_cube_pipeline(plan: &Plan) {
    assert_eq!(plan.len(), 7);
    let pos = |name: &str| {
        assert_eq!(plan.steps.iter().filter(|s| s.action == name).count(), 1, "{name}");
        plan.position(name).unwrap()
    };
    let inspect = pos("inspect-cube-on-platform-a");
    let discover = pos("discover-black-dot");
    let identify = pos("identify-correct-cube");
    let pick = pos("pick-up");
    let rotate = pos("rotate-cube");
    let place = pos("place");
    let mark = pos("mark-correctly-placed");
    assert!(inspect < identify);
    assert!(pick < rotate && pick < place);
    assert!([inspect, discover, identify, rotate, place].iter().all(|&i| i < mark));
    assert_eq!(mark, 6);
}

#[test]
fn cube_astar_every_heuristic_finds_seven_steps() {
    let (d, p) = load("cube");
    let task = ground(&d, &p).unwrap();
    let bfs = solve(&task, Algorithm::Bfs, HeuristicKind::GoalCount, Limits::default());
    assert_eq!(bfs.plan.as_ref().unwrap().len(), 7);
    for h in HeuristicKind::ALL {
        let r = solve(&task, Algorithm::AStar, h, Limits::default());
        assert_eq!(r.status, Status::Solved, "{h}");
        let plan = r.plan.unwrap();
        assert_cube_pipeline(&plan);
        assert!(validate_plan(&d, &p, &plan).is_valid(), "{h}");
    }
}

#[test]
fn augmented_cube_forces_the_canonical_pipeline_order() {
    let (d, p) = load("cube-augmented");
    let task = ground(&d, &p).unwrap();
    for h in HeuristicKind::ALL {
        let plan = solve(&task, Algorithm::AStar, h, Limits::default()).plan.unwrap();
        assert_cube_pipeline(&plan);
        let at = |n: &str| plan.position(n).unwrap();
        assert!(at("inspect-cube-on-platform-a") < at("discover-black-dot"));
        assert!(at("discover-black-dot") < at("identify-correct-cube"));
        assert!(at("identify-correct-cube") < at("place"));
        assert!(at("rotate-cube") < at("place"));
    }
}

#[test]
fn soundness_and_optimality_sweep() {
    for name in BENCHMARKS {
        let (d, p) = load(name);
        let task = ground(&d, &p).unwrap();
        let bfs = solve(&task, Algorithm::Bfs, HeuristicKind::GoalCount, Limits::default());
        for algo in Algorithm::ALL {
            for h in HeuristicKind::ALL {
                let r = solve(&task, algo, h, Limits::default());
                assert_eq!(r.plan.is_some(), r.status == Status::Solved);
                if r.status == Status::Unsolvable {
                    assert!(r.certificate.as_ref().is_some_and(|c| c.is_conclusive()));
                }
                if let Some(plan) = &r.plan {
                    let v = validate_plan(&d, &p, plan);
                    assert!(v.is_valid(), "{name} {algo} {h}: {v}");
                    assert_eq!(task.replay(plan).map(|s| task.is_goal(&s)), Ok(true));
                }
                if algo == Algorithm::AStar && h != HeuristicKind::HAdd {
                    assert_eq!(r.status, bfs.status, "{name} {h}");
                    assert_eq!(
                        r.plan.as_ref().map(Plan::len),
                        bfs.plan.as_ref().map(Plan::len),
                        "{name} {h}"
                    );
                }
            }
        }
    }
}

#[test]
fn cube_bfs_g_equals_depth() {
    let (d, p) = load("cube");
    let task = ground(&d, &p).unwrap();
    let r = solve(&task, Algorithm::Bfs, HeuristicKind::GoalCount, Limits::default());
    let plan = r.plan.unwrap();
    assert_eq!(r.cost, Some(plan.len() as u32));
}

#[test]
fn signatures_distinguish_benchmarks() {
    let mut seen = BTreeSet::new();
    for name in BENCHMARKS {
        let (d, p) = load(name);
        assert!(seen.insert(create_signature(&d, &p).to_string()), "{name}");
    }
    let (flawed, pf) = load("microwave-flawed");
    let (fixed, px) = load("microwave-fixed");
    let (a, b) = (create_signature(&flawed, &pf), create_signature(&fixed, &px));
    assert_ne!(a.domain_digest, b.domain_digest);
    assert_eq!(a.problem_digest, b.problem_digest);
    assert_eq!(
        a.to_string(),
        "67ca95a5733f747be7dac63a57122dff8170c1cfc72dbd839577bc94abc14f9e:\
         891134370fba14d59185eaf342577fc358ae604b4828bf820d6f9636c12f5fcb"
    );
}

#[test]
fn beer_init_order_and_goal_extension() {
    let (d, p) = load("beer");
    let mut shuffled = p.clone();
    shuffled.init.reverse();
    shuffled.goal.reverse();
    assert_eq!(create_signature(&d, &p), create_signature(&d, &shuffled));
    let mut extended = p.clone();
    extended.goal.push(planner_core::Literal::pos(atom("fridge-closed(fridge)")));
    let (s1, s2) = (create_signature(&d, &p), create_signature(&d, &extended));
    assert_eq!(s1.domain_digest, s2.domain_digest);
    assert_ne!(s1.problem_digest, s2.problem_digest);
}
