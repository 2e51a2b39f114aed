#![allow(dead_code)]

use std::path::PathBuf;

use planner_core::{parse_domain, parse_problem, Domain, Plan, Problem};

pub const BENCHMARKS: [&str; 5] = [
    "beer",
    "microwave-flawed",
    "microwave-fixed",
    "cube",
    "cube-augmented",
];

pub fn asset_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../benchmarks")
        .join(rel)
}

pub fn asset(rel: &str) -> String {
    std::fs::read_to_string(asset_path(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

pub fn load(name: &str) -> (Domain, Problem) {
    let domain = parse_domain(&asset(&format!("{name}/domain.pddl"))).unwrap();
    let problem = parse_problem(&asset(&format!("{name}/problem.pddl")), &domain).unwrap();
    (domain, problem)
}

pub fn golden(name: &str, plan: &str) -> Plan {
    Plan::parse(&asset(&format!("{name}/golden/{plan}.plan"))).unwrap()
}

pub fn golden_names(name: &str) -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(asset_path(&format!("{name}/golden")))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "plan"))
        .map(|p| p.file_stem().unwrap().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
}
