use planner_core::validate_plan;
use planner_hybrid::benchmarks::{
    beer_softgoal_ablation, load_benchmark, run_ablation, BenchmarkError, ABLATION_NAMES,
    BENCHMARK_NAMES,
};

#[test]
fn every_bundled_benchmark_loads_and_goldens_validate() {
    for name in BENCHMARK_NAMES {
        let b = load_benchmark(name).unwrap();
        assert_eq!(b.name, *name);
        for (label, plan) in &b.golden {
            assert!(
                validate_plan(&b.domain, &b.problem, plan).is_valid(),
                "{name}/{label}"
            );
        }
    }
}

#[test]
fn unknown_names_are_errors() {
    assert!(matches!(load_benchmark("kettle"), Err(BenchmarkError::Unknown(_))));
    assert!(matches!(run_ablation("kettle"), Err(BenchmarkError::Unknown(_))));
}

#[test]
fn beer_penalty_sweep() {
    let report = beer_softgoal_ablation(&[0.0, 1.0, 2.0, 3.0]).unwrap();
    let lengths: Vec<usize> = report.rows.iter().map(|r| r.plan_length).collect();
    assert_eq!(lengths, vec![7, 7, 7, 8, 8]);
    let costs: Vec<Option<f64>> = report.rows.iter().map(|r| r.plan_cost).collect();
    assert_eq!(costs, vec![Some(7.0), Some(7.0), Some(8.0), Some(8.0), Some(8.0)]);
    assert!(report.rows[3].plan.contains_action("close-fridge"));
}

#[test]
fn cube_ablation_cuts_expansions_at_equal_length() {
    let report = run_ablation("cube-preconditions").unwrap();
    let (before, after) = (&report.rows[0], &report.rows[1]);
    assert_eq!(before.plan_length, 7);
    assert_eq!(after.plan_length, 7);
    assert!(after.expansions < before.expansions);
    assert!(report.expansion_ratio < 1.0);
    let table = report.to_string();
    assert!(table.contains("expansion ratio"));
    assert!(table.contains("with five preconditions"));
}

#[test]
fn every_ablation_runs() {
    for name in ABLATION_NAMES {
        let report = run_ablation(name).unwrap();
        assert!(report.rows.len() >= 2, "{name}");
    }
}

#[test]
fn beer_soft_goal_runtime_overhead_stays_small() {
    let (mut hard, mut soft) = (0.0, 0.0);
    for _ in 0..100 {
        let report = beer_softgoal_ablation(&[2.0]).unwrap();
        hard += report.rows[0].wall_time.as_secs_f64();
        soft += report.rows[1].wall_time.as_secs_f64();
    }
    let overhead = soft / hard - 1.0;
    eprintln!("beer soft-goal runtime overhead: {:.1}%", overhead * 100.0);
    assert!(overhead < 0.5, "overhead {:.1}%", overhead * 100.0);
}
