//! The solver-first hybrid planner.
//!
//! [`HybridPlanner::get_plan`] tries, in order:
//!
//! 1. a known plan for the problem signature (re-validated before use);
//! 2. a known flaw: apply the stored fix, solve, cache the plan;
//! 3. the classical solver, then
//!    * on success, an optional commonsense review and corrected plan, or
//!    * on unsolvability, a gap analysis whose fix is cached and applied.
//!
//! Every call yields a [`Trace`] with exactly one `returned` event.

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use planner_core::fixes::solve_with_soft_goals;
use planner_core::model::ModelError;
use planner_core::search::{Algorithm, HeuristicKind, Limits, Status};
use planner_core::{
    apply_fixes, create_signature, ground, validate_plan, Domain, FixError, Plan, Problem,
    ProblemSignature,
};
use serde::Serialize;
use thiserror::Error;

use crate::advisor::{
    gap_analysis_for_domain, generate_fixed_plan, review_commonsense, AdvisorBackend, AdvisorMode,
};
use crate::cache::{timestamp, CacheError, FlawRecord, PlanCache, PlanRecord, Provenance};

#[derive(Clone)]
pub struct PlannerConfig {
    pub algorithm: Algorithm,
    pub heuristic: HeuristicKind,
    pub limits: Limits,
    pub advisor: Option<Arc<dyn AdvisorBackend>>,
    pub cache_dir: Option<PathBuf>,
    pub review_enabled: bool,
    pub max_repair_rounds: u32,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            algorithm: Algorithm::AStar,
            heuristic: HeuristicKind::HMax,
            limits: Limits::default(),
            advisor: None,
            cache_dir: None,
            review_enabled: true,
            max_repair_rounds: 1,
        }
    }
}

impl fmt::Debug for PlannerConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PlannerConfig")
            .field("algorithm", &self.algorithm)
            .field("heuristic", &self.heuristic)
            .field("limits", &self.limits)
            .field("advisor", &self.advisor.as_ref().map(|a| a.id()))
            .field("cache_dir", &self.cache_dir)
            .field("review_enabled", &self.review_enabled)
            .field("max_repair_rounds", &self.max_repair_rounds)
            .finish()
    }
}

/// Where a returned plan (or its absence) came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Source {
    #[serde(rename = "cache")]
    Cache,
    #[serde(rename = "known-flaw")]
    KnownFlaw,
    #[serde(rename = "solver")]
    Solver,
    #[serde(rename = "solver+review")]
    SolverReview,
    #[serde(rename = "repaired-domain")]
    RepairedDomain,
    #[serde(rename = "unsolvable")]
    Unsolvable,
    #[serde(rename = "timeout")]
    Timeout,
    #[serde(rename = "advisor-unavailable")]
    AdvisorUnavailable,
}

impl Source {
    pub fn name(self) -> &'static str {
        match self {
            Source::Cache => "cache",
            Source::KnownFlaw => "known-flaw",
            Source::Solver => "solver",
            Source::SolverReview => "solver+review",
            Source::RepairedDomain => "repaired-domain",
            Source::Unsolvable => "unsolvable",
            Source::Timeout => "timeout",
            Source::AdvisorUnavailable => "advisor-unavailable",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "event", rename_all = "kebab-case")]
pub enum TraceEvent {
    CachePlanHit,
    CacheFlawHit,
    SolverCall { status: Status, expansions: u64 },
    AdvisorCall { mode: AdvisorMode },
    FixApplied,
    PlanCached { provenance: Provenance },
    FlawCached,
    Warning { message: String },
    Returned { source: Source },
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceEvent::CachePlanHit => f.write_str("known plan found"),
            TraceEvent::CacheFlawHit => f.write_str("known flaw found"),
            TraceEvent::SolverCall { status, expansions } => {
                write!(f, "solver finished: {status} after {expansions} expansions")
            }
            TraceEvent::AdvisorCall { mode } => write!(f, "advisor consulted ({mode})"),
            TraceEvent::FixApplied => f.write_str("domain fix applied"),
            TraceEvent::PlanCached { provenance } => {
                write!(f, "plan cached ({})", provenance.name())
            }
            TraceEvent::FlawCached => f.write_str("flaw cached"),
            TraceEvent::Warning { message } => write!(f, "warning: {message}"),
            TraceEvent::Returned { source } => write!(f, "returned ({})", source.name()),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
}

impl Trace {
    fn push(&mut self, event: TraceEvent) {
        match &event {
            TraceEvent::Warning { message } => log::warn!("{message}"),
            other => log::info!("{other}"),
        }
        self.events.push(event);
    }

    pub fn solver_calls(&self) -> usize {
        self.count(|e| matches!(e, TraceEvent::SolverCall { .. }))
    }

    pub fn advisor_calls(&self) -> usize {
        self.count(|e| matches!(e, TraceEvent::AdvisorCall { .. }))
    }

    pub fn count(&self, pred: impl Fn(&TraceEvent) -> bool) -> usize {
        self.events.iter().filter(|e| pred(e)).count()
    }

    pub fn contains(&self, event: &TraceEvent) -> bool {
        self.events.contains(event)
    }

    pub fn source(&self) -> Option<Source> {
        self.events.iter().rev().find_map(|e| match e {
            TraceEvent::Returned { source } => Some(*source),
            _ => None,
        })
    }

    /// One JSON object per line.
    pub fn to_jsonl(&self) -> String {
        self.events
            .iter()
            .map(|e| serde_json::to_string(e).expect("serializable") + "\n")
            .collect()
    }
}

#[derive(Debug, Error)]
pub enum PlannerError {
    #[error(transparent)]
    Cache(#[from] CacheError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Fix(#[from] FixError),
    #[error("internal error: solver plan failed validation: {0}")]
    UnsoundPlan(String),
}

#[derive(Debug, Clone)]
pub struct PlanOutcome {
    pub signature: ProblemSignature,
    pub plan: Option<Plan>,
    pub source: Source,
    pub trace: Trace,
}

struct Solved {
    plan: Option<Plan>,
    status: Status,
    certificate: Option<planner_core::UnsolvabilityCertificate>,
}

pub struct HybridPlanner {
    config: PlannerConfig,
    cache: Option<PlanCache>,
    locks: Mutex<HashMap<ProblemSignature, Arc<Mutex<()>>>>,
}

impl fmt::Debug for HybridPlanner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HybridPlanner")
            .field("config", &self.config)
            .field("cache", &self.cache)
            .finish()
    }
}

impl HybridPlanner {
    /// Opens the cache directory, if configured.
    pub fn new(config: PlannerConfig) -> Result<Self, PlannerError> {
        let cache = config.cache_dir.as_ref().map(PlanCache::open).transpose()?;
        Ok(HybridPlanner {
            config,
            cache,
            locks: Mutex::new(HashMap::new()),
        })
    }

    pub fn config(&self) -> &PlannerConfig {
        &self.config
    }

    pub fn cache(&self) -> Option<&PlanCache> {
        self.cache.as_ref()
    }

    fn signature_lock(&self, signature: &ProblemSignature) -> Arc<Mutex<()>> {
        let mut locks = self.locks.lock().unwrap_or_else(|p| p.into_inner());
        locks.entry(signature.clone()).or_default().clone()
    }

    pub fn get_plan(&self, domain: &Domain, problem: &Problem) -> Result<PlanOutcome, PlannerError> {
        let signature = create_signature(domain, problem);
        let lock = self.signature_lock(&signature);
        let _guard = lock.lock().unwrap_or_else(|p| p.into_inner());
        let mut trace = Trace::default();
        let (plan, source) = self.resolve(domain, problem, &signature, &mut trace)?;
        trace.push(TraceEvent::Returned { source });
        Ok(PlanOutcome {
            signature,
            plan,
            source,
            trace,
        })
    }

    fn resolve(
        &self,
        domain: &Domain,
        problem: &Problem,
        signature: &ProblemSignature,
        trace: &mut Trace,
    ) -> Result<(Option<Plan>, Source), PlannerError> {
        if let Some(cache) = &self.cache {
            if let Some(record) = cache.get_plan(signature) {
                trace.push(TraceEvent::CachePlanHit);
                if self.cached_plan_valid(cache, domain, problem, signature, &record.plan) {
                    return Ok((Some(record.plan), Source::Cache));
                }
                trace.push(TraceEvent::Warning {
                    message: format!("cached plan for {signature} no longer validates; re-planning"),
                });
            } else if let Some(flaw) = cache.get_flaw(signature) {
                trace.push(TraceEvent::CacheFlawHit);
                let (d2, p2) = apply_fixes(domain, problem, &flaw.fix)?;
                trace.push(TraceEvent::FixApplied);
                let plan = self.solve_and_cache(&d2, &p2, signature, Provenance::RepairedDomain, trace)?;
                let source = if plan.is_some() { Source::KnownFlaw } else { Source::Unsolvable };
                return Ok((plan, source));
            }
        }

        let solved = self.solve(domain, problem, trace)?;
        match solved.status {
            Status::Solved => {
                let plan = solved.plan.expect("solved has plan");
                self.after_success(domain, problem, signature, plan, trace)
            }
            Status::Timeout => Ok((None, Source::Timeout)),
            Status::Unsolvable => {
                let certificate = solved.certificate.unwrap_or_default();
                self.after_failure(domain, problem, signature, &certificate, trace)
            }
        }
    }

    fn cached_plan_valid(
        &self,
        cache: &PlanCache,
        domain: &Domain,
        problem: &Problem,
        signature: &ProblemSignature,
        plan: &Plan,
    ) -> bool {
        if validate_plan(domain, problem, plan).is_valid() {
            return true;
        }
        cache.peek_flaw(signature).is_some_and(|flaw| {
            apply_fixes(domain, problem, &flaw.fix)
                .is_ok_and(|(d2, p2)| validate_plan(&d2, &p2, plan).is_valid())
        })
    }

    fn solve(&self, domain: &Domain, problem: &Problem, trace: &mut Trace) -> Result<Solved, PlannerError> {
        let task = ground(domain, problem)?;
        let solution = solve_with_soft_goals(
            &task,
            self.config.algorithm,
            self.config.heuristic,
            self.config.limits,
        )?;
        let result = solution.result;
        trace.push(TraceEvent::SolverCall {
            status: result.status,
            expansions: result.expansions,
        });
        if let Some(plan) = &result.plan {
            let verdict = validate_plan(domain, problem, plan);
            if !verdict.is_valid() {
                return Err(PlannerError::UnsoundPlan(verdict.to_string()));
            }
        }
        Ok(Solved {
            plan: result.plan,
            status: result.status,
            certificate: result.certificate,
        })
    }

    /// Solves and, on success, stores the plan under `signature`. A failed
    /// cache write is reported in the trace; the plan is still returned.
    pub fn solve_and_cache(
        &self,
        domain: &Domain,
        problem: &Problem,
        signature: &ProblemSignature,
        provenance: Provenance,
        trace: &mut Trace,
    ) -> Result<Option<Plan>, PlannerError> {
        let solved = self.solve(domain, problem, trace)?;
        let Some(plan) = solved.plan else {
            return Ok(None);
        };
        self.store_plan(signature, &plan, provenance, trace);
        Ok(Some(plan))
    }

    fn store_plan(
        &self,
        signature: &ProblemSignature,
        plan: &Plan,
        provenance: Provenance,
        trace: &mut Trace,
    ) {
        let Some(cache) = &self.cache else { return };
        let record = PlanRecord {
            signature: signature.clone(),
            plan: plan.clone(),
            created_at: timestamp(),
            provenance,
        };
        match cache.put_plan(record) {
            Ok(()) => trace.push(TraceEvent::PlanCached { provenance }),
            Err(e) => trace.push(TraceEvent::Warning {
                message: format!("could not cache plan: {e}"),
            }),
        }
    }

    fn after_success(
        &self,
        domain: &Domain,
        problem: &Problem,
        signature: &ProblemSignature,
        plan: Plan,
        trace: &mut Trace,
    ) -> Result<(Option<Plan>, Source), PlannerError> {
        let advisor = match &self.config.advisor {
            Some(advisor) if self.config.review_enabled => advisor.as_ref(),
            _ => {
                self.store_plan(signature, &plan, Provenance::Solver, trace);
                return Ok((Some(plan), Source::Solver));
            }
        };
        trace.push(TraceEvent::AdvisorCall {
            mode: AdvisorMode::Review,
        });
        let verdict = match review_commonsense(advisor, signature, domain, problem, &plan) {
            Ok(v) => v,
            Err(e) => {
                trace.push(TraceEvent::Warning {
                    message: format!("review failed, returning solver plan uncached: {e}"),
                });
                return Ok((Some(plan), Source::Solver));
            }
        };
        if verdict.is_good {
            self.store_plan(signature, &plan, Provenance::Solver, trace);
            return Ok((Some(plan), Source::Solver));
        }
        trace.push(TraceEvent::AdvisorCall {
            mode: AdvisorMode::Fix,
        });
        match generate_fixed_plan(advisor, signature, domain, problem, &plan, &verdict.feedback) {
            Ok(fixed) => {
                self.store_plan(signature, &fixed, Provenance::SolverReview, trace);
                Ok((Some(fixed), Source::SolverReview))
            }
            Err(e) => {
                trace.push(TraceEvent::Warning {
                    message: format!("corrected plan rejected, returning solver plan uncached: {e}"),
                });
                Ok((Some(plan), Source::Solver))
            }
        }
    }

    fn after_failure(
        &self,
        domain: &Domain,
        problem: &Problem,
        signature: &ProblemSignature,
        certificate: &planner_core::UnsolvabilityCertificate,
        trace: &mut Trace,
    ) -> Result<(Option<Plan>, Source), PlannerError> {
        let advisor = match &self.config.advisor {
            Some(advisor) if self.config.max_repair_rounds > 0 => advisor.as_ref(),
            _ => return Ok((None, Source::Unsolvable)),
        };
        trace.push(TraceEvent::AdvisorCall {
            mode: AdvisorMode::Gap,
        });
        let analysis = match gap_analysis_for_domain(advisor, signature, domain, problem, certificate) {
            Ok(Some(analysis)) => analysis,
            Ok(None) => return Ok((None, Source::Unsolvable)),
            Err(e) => {
                trace.push(TraceEvent::Warning {
                    message: format!("gap analysis failed: {e}"),
                });
                return Ok((None, Source::AdvisorUnavailable));
            }
        };
        let (d2, p2) = match apply_fixes(domain, problem, &analysis.fix) {
            Ok(repaired) => repaired,
            Err(e) => {
                trace.push(TraceEvent::Warning {
                    message: format!("proposed fix does not apply: {e}"),
                });
                return Ok((None, Source::Unsolvable));
            }
        };
        if let Some(cache) = &self.cache {
            let record = FlawRecord {
                signature: signature.clone(),
                fix: analysis.fix.clone(),
                created_at: timestamp(),
                advisor: advisor.id(),
            };
            cache.put_flaw(record)?;
            trace.push(TraceEvent::FlawCached);
        }
        trace.push(TraceEvent::FixApplied);
        let solved = self.solve(&d2, &p2, trace)?;
        Ok(match solved.plan {
            Some(plan) => (Some(plan), Source::RepairedDomain),
            None => (None, Source::Unsolvable),
        })
    }
}
