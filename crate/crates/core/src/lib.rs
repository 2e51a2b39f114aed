//! STRIPS planning core: PDDL model and parser, grounding, classical search,
//! plan validation, problem signatures and domain fixes.
//!
//! Search is generic over the action-cost scalar ([`CostScalar`]); the
//! aliases below fix it to the unit-cost integer type used by default.

pub mod fixes;
pub mod model;
pub mod num;
pub mod parser;
pub mod plan;
pub mod search;
pub mod signature;
pub mod validate;

pub use fixes::{apply_fixes, parse_fix, print_fix, DomainFix, FixError};
pub use model::{Atom, Domain, Literal, Problem, SoftGoal};
pub use num::CostScalar;
pub use parser::{parse_domain, parse_problem, print_domain, print_problem, ParseError};
pub use plan::{Plan, PlanStep};
pub use search::{solve, Algorithm, HeuristicKind, Limits, Status, UnsolvabilityCertificate};
pub use signature::{create_signature, ProblemSignature};
pub use validate::{validate_plan, Verdict};

/// Default cost scalar: unit action costs, integer penalties.
pub type Cost = u32;
pub type Task = model::GroundTask<Cost>;
pub type GroundAction = model::GroundAction<Cost>;
pub type SearchResult = search::SearchResult<Cost>;
pub type SoftGoalSolution = fixes::SoftGoalSolution<Cost>;

/// Grounds `problem` against `domain` with the default cost scalar.
pub fn ground(domain: &Domain, problem: &Problem) -> Result<Task, model::ModelError> {
    model::ground(domain, problem)
}
