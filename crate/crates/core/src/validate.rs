//! Plan validation by direct interpretation of the lifted model.
//!
//! Each step binds the schema parameters, type-checks the arguments,
//! evaluates the preconditions over a set of ground atoms and applies the
//! effects.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::model::{is_variable, Atom, Domain, Literal, Problem, TypeHierarchy};
use crate::plan::Plan;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Outcome {
    Valid,
    /// The step names an action the domain does not define.
    UnknownAction { step: usize, action: String },
    /// Wrong arity, unknown object, or ill-typed argument.
    BadArguments {
        step: usize,
        action: String,
        reason: String,
    },
    PreconditionUnmet {
        step: usize,
        action: String,
        literal: String,
    },
    GoalUnsatisfied { missing: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub outcome: Outcome,
    /// Soft goals that hold after the last executed step.
    pub soft_goals_met: Vec<Atom>,
    pub soft_goals_unmet: Vec<Atom>,
    /// Plan length plus penalties of unmet soft goals; only for valid plans.
    pub cost: Option<f64>,
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        self.outcome == Outcome::Valid
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.outcome {
            Outcome::Valid => write!(f, "valid")?,
            Outcome::UnknownAction { step, action } => {
                write!(f, "invalid: step {} uses unknown action `{action}`", step + 1)?
            }
            Outcome::BadArguments {
                step,
                action,
                reason,
            } => write!(f, "invalid: step {} `{action}`: {reason}", step + 1)?,
            Outcome::PreconditionUnmet {
                step,
                action,
                literal,
            } => write!(
                f,
                "invalid: step {} `{action}` precondition `{literal}` does not hold",
                step + 1
            )?,
            Outcome::GoalUnsatisfied { missing } => {
                write!(f, "invalid: goal not reached, missing {}", missing.join(", "))?
            }
        }
        for atom in &self.soft_goals_met {
            write!(f, "\nsoft goal {atom}: met")?;
        }
        for atom in &self.soft_goals_unmet {
            write!(f, "\nsoft goal {atom}: unmet")?;
        }
        Ok(())
    }
}

fn holds(state: &BTreeSet<Atom>, literal: &Literal) -> bool {
    state.contains(&literal.atom) == literal.positive
}

/// Replays `plan` from the problem's initial state and checks the hard goal.
pub fn validate_plan(domain: &Domain, problem: &Problem, plan: &Plan) -> Verdict {
    let types = match TypeHierarchy::new(&domain.types) {
        Ok(t) => t,
        Err(e) => {
            return Verdict {
                outcome: Outcome::BadArguments {
                    step: 0,
                    action: String::new(),
                    reason: e.to_string(),
                },
                soft_goals_met: vec![],
                soft_goals_unmet: vec![],
                cost: None,
            }
        }
    };
    let objects: BTreeMap<&str, &str> = domain
        .constants
        .iter()
        .chain(&problem.objects)
        .map(|o| (o.name.as_str(), o.type_name.as_str()))
        .collect();
    let mut state: BTreeSet<Atom> = problem.init.iter().cloned().collect();

    let outcome = 'run: {
        for (step, call) in plan.steps.iter().enumerate() {
            let label = call.to_string();
            let Some(schema) = domain.action(&call.action) else {
                break 'run Outcome::UnknownAction {
                    step,
                    action: call.action.clone(),
                };
            };
            if schema.params.len() != call.args.len() {
                break 'run Outcome::BadArguments {
                    step,
                    action: label,
                    reason: format!(
                        "expected {} arguments, got {}",
                        schema.params.len(),
                        call.args.len()
                    ),
                };
            }
            let mut binding = BTreeMap::new();
            for (param, arg) in schema.params.iter().zip(&call.args) {
                let Some(ty) = objects.get(arg.as_str()) else {
                    break 'run Outcome::BadArguments {
                        step,
                        action: label,
                        reason: format!("unknown object `{arg}`"),
                    };
                };
                if !types.is_subtype(ty, &param.type_name) {
                    break 'run Outcome::BadArguments {
                        step,
                        action: label,
                        reason: format!("`{arg}` is not a `{}`", param.type_name),
                    };
                }
                binding.insert(param.name.as_str(), arg.as_str());
            }
            let bind = |atom: &Atom| Atom {
                predicate: atom.predicate.clone(),
                args: atom
                    .args
                    .iter()
                    .map(|t| {
                        if is_variable(t) {
                            binding.get(t.as_str()).map_or_else(|| t.clone(), |v| v.to_string())
                        } else {
                            t.clone()
                        }
                    })
                    .collect(),
            };
            for pre in &schema.preconditions {
                let literal = Literal {
                    atom: bind(&pre.atom),
                    positive: pre.positive,
                };
                if !holds(&state, &literal) {
                    break 'run Outcome::PreconditionUnmet {
                        step,
                        action: label,
                        literal: literal.to_string(),
                    };
                }
            }
            let adds: Vec<Atom> = schema.add_effects.iter().map(bind).collect();
            for atom in &schema.delete_effects {
                state.remove(&bind(atom));
            }
            state.extend(adds);
        }
        let missing: Vec<String> = problem
            .goal
            .iter()
            .filter(|l| !holds(&state, l))
            .map(ToString::to_string)
            .collect();
        if missing.is_empty() {
            Outcome::Valid
        } else {
            Outcome::GoalUnsatisfied { missing }
        }
    };

    let (met, unmet): (Vec<_>, Vec<_>) = problem
        .soft_goals
        .iter()
        .partition(|s| state.contains(&s.atom));
    let cost = (outcome == Outcome::Valid).then(|| {
        plan.len() as f64 + unmet.iter().map(|s| s.penalty).sum::<f64>()
    });
    Verdict {
        outcome,
        soft_goals_met: met.into_iter().map(|s| s.atom.clone()).collect(),
        soft_goals_unmet: unmet.into_iter().map(|s| s.atom.clone()).collect(),
        cost,
    }
}
