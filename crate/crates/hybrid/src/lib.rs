//! Solver-first hybrid planning: persistent plan and flaw caches, an advisor
//! for plan review and domain repair, the orchestrating planner, and the
//! bundled benchmarks.

pub mod advisor;
pub mod benchmarks;
pub mod cache;
pub mod orchestrator;

pub use advisor::{AdvisorBackend, HttpAdvisor, ScriptedAdvisor};
pub use benchmarks::{load_benchmark, run_ablation, AblationReport, Benchmark};
pub use cache::{PlanCache, PlanRecord, FlawRecord, Provenance};
pub use orchestrator::{HybridPlanner, PlanOutcome, PlannerConfig, Source, Trace, TraceEvent};
