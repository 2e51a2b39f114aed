//! Structured domain/problem deltas and their application.
//!
//! A [`DomainFix`] adds action schemas, strengthens preconditions, and adds
//! hard subgoals or soft goals. Its wire form is a JSON object:
//!
//! ```json
//! {
//!   "missing_actions": ["turn-on-microwave"],
//!   "missing_preconditions": [
//!     {"action": "wait-finish", "atom": "microwave-on(microwave1)", "why": "..."}
//!   ],
//!   "action_definitions": {"turn-on-microwave": "(:action turn-on-microwave ...)"},
//!   "added_subgoals": ["fridge-closed(fridge)"],
//!   "added_soft_goals": [{"atom": "fridge-closed(fridge)", "penalty": 2}]
//! }
//! ```

mod soft;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::model::{
    is_variable, ActionSchema, Atom, Domain, Literal, ModelError, Problem, SoftGoal,
};
use crate::parser::{parse_action, print_action, ParseError};

pub use soft::{solve_with_soft_goals, SoftGoalSolution, MAX_SOFT_GOALS};

/// Keys of the fix document that are understood but are not part of the fix
/// itself (they come from gap-analysis replies).
pub const PASSTHROUGH_KEYS: [&str; 2] = ["suggested_plan", "rationale"];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FixError {
    #[error("fix is empty")]
    Empty,
    #[error("action `{0}` already exists in the domain")]
    SchemaCollision(String),
    #[error("missing precondition refers to unknown action `{0}`")]
    UnknownAction(String),
    #[error("missing action `{0}` has no definition")]
    IncompleteAction(String),
    #[error("`{term}` in `{atom}` is neither a parameter of `{action}` nor a known object")]
    UnknownTerm {
        action: String,
        atom: String,
        term: String,
    },
    #[error("at most {max} soft goals are supported, got {found}")]
    TooManySoftGoals { max: usize, found: usize },
    #[error("malformed fix document: {0}")]
    Malformed(String),
    #[error("action definition: {0}")]
    Action(#[from] ParseError),
    #[error("repaired model is invalid: {0}")]
    Invalid(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MissingPrecondition {
    pub action: String,
    pub atom: Atom,
    #[serde(default)]
    pub why: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DomainFix {
    pub missing_actions: Vec<ActionSchema>,
    pub missing_preconditions: Vec<MissingPrecondition>,
    pub added_soft_goals: Vec<SoftGoal>,
    pub added_subgoals: Vec<Atom>,
    /// Keys carried through unchanged (`suggested_plan`, `rationale`, and any
    /// unknown key).
    pub extra: BTreeMap<String, Value>,
}

impl DomainFix {
    pub fn is_empty(&self) -> bool {
        self.missing_actions.is_empty()
            && self.missing_preconditions.is_empty()
            && self.added_soft_goals.is_empty()
            && self.added_subgoals.is_empty()
    }

    /// Concatenates two fixes, keeping `self`'s passthrough keys on conflict.
    pub fn merge(mut self, other: DomainFix) -> DomainFix {
        self.missing_actions.extend(other.missing_actions);
        for p in other.missing_preconditions {
            if !self.missing_preconditions.contains(&p) {
                self.missing_preconditions.push(p);
            }
        }
        self.added_soft_goals.extend(other.added_soft_goals);
        for g in other.added_subgoals {
            if !self.added_subgoals.contains(&g) {
                self.added_subgoals.push(g);
            }
        }
        for (k, v) in other.extra {
            self.extra.entry(k).or_insert(v);
        }
        self
    }
}

fn malformed(msg: impl Into<String>) -> FixError {
    FixError::Malformed(msg.into())
}

fn atom_field(value: &Value, what: &str) -> Result<Atom, FixError> {
    let text = value
        .as_str()
        .ok_or_else(|| malformed(format!("{what} must be an atom string")))?;
    Atom::parse_compact(text).map_err(|e| malformed(e.to_string()))
}

/// Reads a fix document. Bare names in `missing_actions` must resolve through
/// `action_definitions`; an entry may also be a full `(:action ...)` form.
pub fn parse_fix(document: &str) -> Result<DomainFix, FixError> {
    let value: Value = serde_json::from_str(document).map_err(|e| malformed(e.to_string()))?;
    fix_from_value(&value)
}

pub fn fix_from_value(value: &Value) -> Result<DomainFix, FixError> {
    let object = value
        .as_object()
        .ok_or_else(|| malformed("document must be a JSON object"))?;
    let mut fix = DomainFix::default();

    let definitions: BTreeMap<String, String> = match object.get("action_definitions") {
        None | Some(Value::Null) => BTreeMap::new(),
        Some(v) => serde_json::from_value(v.clone())
            .map_err(|e| malformed(format!("action_definitions: {e}")))?,
    };
    let definitions: BTreeMap<String, String> = definitions
        .into_iter()
        .map(|(k, v)| (k.to_lowercase(), v))
        .collect();

    if let Some(v) = object.get("missing_actions").filter(|v| !v.is_null()) {
        let entries = v
            .as_array()
            .ok_or_else(|| malformed("missing_actions must be an array"))?;
        for entry in entries {
            let text = entry
                .as_str()
                .ok_or_else(|| malformed("missing_actions entries must be strings"))?;
            let schema = if text.trim_start().starts_with('(') {
                parse_action(text)?
            } else {
                let name = text.trim().to_lowercase();
                let definition = definitions
                    .get(&name)
                    .ok_or_else(|| FixError::IncompleteAction(name.clone()))?;
                let schema = parse_action(definition)?;
                if schema.name != name {
                    return Err(malformed(format!(
                        "definition for `{name}` defines `{}`",
                        schema.name
                    )));
                }
                schema
            };
            fix.missing_actions.push(schema);
        }
    }
    if let Some(v) = object.get("missing_preconditions").filter(|v| !v.is_null()) {
        let entries = v
            .as_array()
            .ok_or_else(|| malformed("missing_preconditions must be an array"))?;
        for entry in entries {
            let action = entry
                .get("action")
                .and_then(Value::as_str)
                .ok_or_else(|| malformed("missing_preconditions entry needs `action`"))?;
            let atom = atom_field(
                entry
                    .get("atom")
                    .ok_or_else(|| malformed("missing_preconditions entry needs `atom`"))?,
                "atom",
            )?;
            let why = entry
                .get("why")
                .and_then(Value::as_str)
                .unwrap_or_default()
                .to_string();
            fix.missing_preconditions.push(MissingPrecondition {
                action: action.trim().to_lowercase(),
                atom,
                why,
            });
        }
    }
    if let Some(v) = object.get("added_subgoals").filter(|v| !v.is_null()) {
        let entries = v
            .as_array()
            .ok_or_else(|| malformed("added_subgoals must be an array"))?;
        for entry in entries {
            fix.added_subgoals.push(atom_field(entry, "added_subgoals entry")?);
        }
    }
    if let Some(v) = object.get("added_soft_goals").filter(|v| !v.is_null()) {
        let entries = v
            .as_array()
            .ok_or_else(|| malformed("added_soft_goals must be an array"))?;
        for entry in entries {
            let atom = atom_field(
                entry
                    .get("atom")
                    .ok_or_else(|| malformed("soft goal needs `atom`"))?,
                "atom",
            )?;
            let penalty = entry
                .get("penalty")
                .and_then(Value::as_f64)
                .filter(|p| *p >= 0.0 && p.is_finite())
                .ok_or_else(|| malformed(format!("soft goal `{atom}` needs a non-negative penalty")))?;
            fix.added_soft_goals.push(SoftGoal { atom, penalty });
        }
    }
    const FIX_KEYS: [&str; 5] = [
        "missing_actions",
        "missing_preconditions",
        "action_definitions",
        "added_subgoals",
        "added_soft_goals",
    ];
    for (key, v) in object {
        if FIX_KEYS.contains(&key.as_str()) {
            continue;
        }
        if !PASSTHROUGH_KEYS.contains(&key.as_str()) {
            log::warn!("fix document: unknown key `{key}` preserved as-is");
        }
        fix.extra.insert(key.clone(), v.clone());
    }
    Ok(fix)
}

pub fn fix_to_value(fix: &DomainFix) -> Value {
    let mut object = Map::new();
    object.insert(
        "missing_actions".into(),
        json!(fix.missing_actions.iter().map(|a| a.name.clone()).collect::<Vec<_>>()),
    );
    object.insert(
        "missing_preconditions".into(),
        serde_json::to_value(&fix.missing_preconditions).expect("serializable"),
    );
    let definitions: Map<String, Value> = fix
        .missing_actions
        .iter()
        .map(|a| (a.name.clone(), Value::String(print_action(a))))
        .collect();
    object.insert("action_definitions".into(), Value::Object(definitions));
    object.insert(
        "added_subgoals".into(),
        json!(fix.added_subgoals.iter().map(ToString::to_string).collect::<Vec<_>>()),
    );
    object.insert(
        "added_soft_goals".into(),
        Value::Array(
            fix.added_soft_goals
                .iter()
                .map(|s| json!({"atom": s.atom.to_string(), "penalty": s.penalty}))
                .collect(),
        ),
    );
    for (k, v) in &fix.extra {
        object.insert(k.clone(), v.clone());
    }
    Value::Object(object)
}

pub fn print_fix(fix: &DomainFix) -> String {
    serde_json::to_string_pretty(&fix_to_value(fix)).expect("serializable")
}

/// Compiles `fix` into copies of `domain` and `problem`.
///
/// New schemas are added first, so precondition entries may target them.
/// Precondition terms are schema variables, domain constants, or problem
/// objects; a problem object used this way becomes a domain constant.
/// Preconditions already present are not duplicated.
pub fn apply_fixes(
    domain: &Domain,
    problem: &Problem,
    fix: &DomainFix,
) -> Result<(Domain, Problem), FixError> {
    if fix.is_empty() {
        return Err(FixError::Empty);
    }
    let mut domain = domain.clone();
    let mut problem = problem.clone();

    for schema in &fix.missing_actions {
        if domain.action(&schema.name).is_some() {
            return Err(FixError::SchemaCollision(schema.name.clone()));
        }
        domain.actions.push(schema.clone());
    }

    for missing in &fix.missing_preconditions {
        let Some(index) = domain.actions.iter().position(|a| a.name == missing.action) else {
            return Err(FixError::UnknownAction(missing.action.clone()));
        };
        for term in &missing.atom.args {
            if is_variable(term) {
                if domain.actions[index].param(term).is_none() {
                    return Err(FixError::UnknownTerm {
                        action: missing.action.clone(),
                        atom: missing.atom.to_string(),
                        term: term.clone(),
                    });
                }
            } else if domain.constant(term).is_none() {
                let Some(pos) = problem.objects.iter().position(|o| &o.name == term) else {
                    return Err(FixError::UnknownTerm {
                        action: missing.action.clone(),
                        atom: missing.atom.to_string(),
                        term: term.clone(),
                    });
                };
                domain.constants.push(problem.objects.remove(pos));
            }
        }
        let literal = Literal::pos(missing.atom.clone());
        let schema = &mut domain.actions[index];
        if !schema.preconditions.contains(&literal) {
            schema.preconditions.push(literal);
        }
    }

    for goal in &fix.added_subgoals {
        let literal = Literal::pos(goal.clone());
        if !problem.goal.contains(&literal) {
            problem.goal.push(literal);
        }
    }
    for soft in &fix.added_soft_goals {
        if !problem.soft_goals.iter().any(|s| s.atom == soft.atom) {
            problem.soft_goals.push(soft.clone());
        }
    }

    domain.validate()?;
    problem.validate(&domain)?;
    Ok((domain, problem))
}
