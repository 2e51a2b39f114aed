mod common;

use common::{asset, golden, load};
use planner_core::fixes::{fix_from_value, solve_with_soft_goals, FixError, MAX_SOFT_GOALS};
use planner_core::model::{Atom, SoftGoal};
use planner_core::parser::parse_soft_goals;
use planner_core::search::{Algorithm, HeuristicKind, Limits, Status};
use planner_core::validate::Outcome;
use planner_core::{
    apply_fixes, create_signature, ground, parse_domain, parse_fix, print_domain, print_fix, solve,
    validate_plan, Plan,
};
use serde_json::Value;

const MICROWAVE_SIG: &str = "67ca95a5733f747be7dac63a57122dff8170c1cfc72dbd839577bc94abc14f9e:\
                             891134370fba14d59185eaf342577fc358ae604b4828bf820d6f9636c12f5fcb";

fn microwave_gap() -> Value {
    let fixtures: Value = serde_json::from_str(&asset("microwave-flawed/fixtures.json")).unwrap();
    fixtures[format!("gap:{MICROWAVE_SIG}")].clone()
}

fn suggested_plan(gap: &Value) -> Plan {
    let lines: Vec<&str> = gap["suggested_plan"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    Plan::from_strings(&lines).unwrap()
}

#[test]
fn microwave_fix_document_parses() {
    let fix = fix_from_value(&microwave_gap()).unwrap();
    assert_eq!(fix.missing_actions.len(), 1);
    assert_eq!(fix.missing_actions[0].name, "turn-on-microwave");
    assert_eq!(fix.missing_preconditions.len(), 1);
    assert_eq!(fix.missing_preconditions[0].action, "wait-finish");
    assert_eq!(
        fix.missing_preconditions[0].atom,
        "microwave-on(microwave1)".parse::<Atom>().unwrap()
    );
    assert!(fix.extra.contains_key("suggested_plan"));
    assert_eq!(parse_fix(&print_fix(&fix)).unwrap(), fix);
}

#[test]
fn microwave_repair_solves_with_turn_on_between_put_in_and_wait() {
    let (d, p) = load("microwave-flawed");
    let fix = fix_from_value(&microwave_gap()).unwrap();
    let (d2, p2) = apply_fixes(&d, &p, &fix).unwrap();
    assert!(d.action("turn-on-microwave").is_none());

    let reparsed = parse_domain(&print_domain(&d2)).unwrap();
    assert!(reparsed.action("turn-on-microwave").is_some());
    assert_eq!(reparsed, d2);

    let r = solve(&ground(&d2, &p2).unwrap(), Algorithm::AStar, HeuristicKind::HMax, Limits::default());
    assert_eq!(r.status, Status::Solved);
    let plan = r.plan.unwrap();
    assert!(validate_plan(&d2, &p2, &plan).is_valid());
    let at = |n: &str| plan.position(n).unwrap();
    assert!(at("put-in") < at("turn-on-microwave"));
    assert!(at("turn-on-microwave") < at("wait-finish"));
}

#[test]
fn suggested_plan_is_unknown_on_flawed_and_valid_on_repaired() {
    let (d, p) = load("microwave-flawed");
    let gap = microwave_gap();
    let plan = suggested_plan(&gap);
    let verdict = validate_plan(&d, &p, &plan);
    assert!(matches!(
        verdict.outcome,
        Outcome::UnknownAction { step: 3, ref action } if action == "turn-on-microwave"
    ));
    let (d2, p2) = apply_fixes(&d, &p, &fix_from_value(&gap).unwrap()).unwrap();
    assert!(validate_plan(&d2, &p2, &plan).is_valid());
}

#[test]
fn cube_fix_matches_augmented_domain() {
    let (d, p) = load("cube");
    let fix = parse_fix(&asset("cube/preconditions_fix.json")).unwrap();
    assert_eq!(fix.missing_preconditions.len(), 5);
    let (d2, p2) = apply_fixes(&d, &p, &fix).unwrap();
    let (augmented, pa) = load("cube-augmented");
    assert_eq!(create_signature(&d2, &p2), create_signature(&augmented, &pa));
    assert_eq!(apply_fixes(&d2, &p2, &fix).unwrap(), (d2.clone(), p2.clone()));
}

#[test]
fn cube_fix_keeps_length_and_cuts_expansions() {
    let (d, p) = load("cube");
    let fix = parse_fix(&asset("cube/preconditions_fix.json")).unwrap();
    let (d2, p2) = apply_fixes(&d, &p, &fix).unwrap();
    let before = solve(&ground(&d, &p).unwrap(), Algorithm::AStar, HeuristicKind::HMax, Limits::default());
    let after = solve(&ground(&d2, &p2).unwrap(), Algorithm::AStar, HeuristicKind::HMax, Limits::default());
    assert_eq!(before.plan.as_ref().unwrap().len(), 7);
    assert_eq!(after.plan.as_ref().unwrap().len(), 7);
    assert!(after.expansions < before.expansions, "{} vs {}", after.expansions, before.expansions);
}

#[test]
fn repaired_cube_plans_replay_on_original() {
    let (d, p) = load("cube");
    let fix = parse_fix(&asset("cube/preconditions_fix.json")).unwrap();
    let (d2, p2) = apply_fixes(&d, &p, &fix).unwrap();
    let task = ground(&d2, &p2).unwrap();
    for algo in Algorithm::ALL {
        for h in HeuristicKind::ALL {
            if let Some(plan) = solve(&task, algo, h, Limits::default()).plan {
                assert!(validate_plan(&d2, &p2, &plan).is_valid());
                assert!(validate_plan(&d, &p, &plan).is_valid(), "{algo} {h}");
            }
        }
    }
    assert!(validate_plan(&d, &p, &golden("cube", "canonical")).is_valid());
}

#[test]
fn subgoal_fix_forces_close_fridge() {
    let (d, p) = load("beer");
    let fix = parse_fix(r#"{"added_subgoals": ["fridge-closed(fridge)"]}"#).unwrap();
    let (d2, p2) = apply_fixes(&d, &p, &fix).unwrap();
    assert_eq!(d2, d);
    assert_eq!(p2.goal.len(), p.goal.len() + 1);
    let r = solve(&ground(&d2, &p2).unwrap(), Algorithm::AStar, HeuristicKind::HMax, Limits::default());
    let plan = r.plan.unwrap();
    assert_eq!(plan.len(), 8);
    assert!(plan.contains_action("close-fridge"));
}

fn beer_with_penalty(penalty: f64) -> planner_core::Task {
    let (d, mut p) = load("beer");
    p.soft_goals = vec![SoftGoal {
        atom: "fridge-closed(fridge)".parse().unwrap(),
        penalty,
    }];
    ground(&d, &p).unwrap()
}

#[test]
fn soft_goal_penalty_flips_plan_length() {
    for (penalty, len) in [(0.0, 7), (1.0, 7), (2.0, 8), (5.0, 8)] {
        let task = beer_with_penalty(penalty);
        let s = solve_with_soft_goals(&task, Algorithm::AStar, HeuristicKind::HMax, Limits::default()).unwrap();
        let plan = s.result.plan.as_ref().unwrap();
        assert_eq!(plan.len(), len, "penalty {penalty}");
        assert_eq!(plan.contains_action("close-fridge"), len == 8);
        let expected_total = if len == 8 { 8 } else { 7 + penalty as u32 };
        assert_eq!(s.total_cost, Some(expected_total));
        assert_eq!(s.subsets_tried, 2);
    }
}

#[test]
fn sidecar_penalty_selects_eight_steps() {
    let (d, mut p) = load("beer");
    p.soft_goals = parse_soft_goals(&asset("beer/soft_goals.json")).unwrap();
    let task = ground(&d, &p).unwrap();
    let s = solve_with_soft_goals(&task, Algorithm::AStar, HeuristicKind::HMax, Limits::default()).unwrap();
    let plan = s.result.plan.unwrap();
    let verdict = validate_plan(&d, &p, &plan);
    assert!(verdict.is_valid());
    assert!(verdict.soft_goals_unmet.is_empty());
    assert_eq!(plan.len(), 8);
}

#[test]
fn too_many_soft_goals_rejected() {
    let (d, mut p) = load("beer");
    let atoms = [
        "fridge-closed(fridge)",
        "fridge-open(fridge)",
        "surface(table)",
        "in-fridge(beer-bottle)",
        "open(beer-bottle)",
    ];
    p.soft_goals = atoms
        .iter()
        .map(|a| SoftGoal { atom: a.parse().unwrap(), penalty: 1.0 })
        .collect();
    let task = ground(&d, &p).unwrap();
    assert!(matches!(
        solve_with_soft_goals(&task, Algorithm::AStar, HeuristicKind::HMax, Limits::default()),
        Err(FixError::TooManySoftGoals { max: MAX_SOFT_GOALS, found: 5 })
    ));
}

#[test]
fn unsolvable_hard_goal_short_circuits_soft_goal_search() {
    let (d, mut p) = load("microwave-flawed");
    p.soft_goals = vec![SoftGoal { atom: "door-closed(microwave1)".parse().unwrap(), penalty: 1.0 }];
    let task = ground(&d, &p).unwrap();
    let s = solve_with_soft_goals(&task, Algorithm::AStar, HeuristicKind::HMax, Limits::default()).unwrap();
    assert_eq!(s.result.status, Status::Unsolvable);
    assert_eq!(s.subsets_tried, 1);
    assert!(s.total_cost.is_none());
}
