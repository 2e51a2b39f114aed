//! The lifted STRIPS model: types, predicates, action schemas, domains and
//! problems, plus the grounder that turns them into a [`GroundTask`].

mod atom;
mod ground;
mod state;

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use atom::{is_variable, Atom, AtomSyntaxError, Literal};
pub use ground::{ground, GroundAction, GroundTask, SoftGoalIndex};
pub use state::GroundState;

/// Root of every type hierarchy.
pub const ROOT_TYPE: &str = "object";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("duplicate action schema `{0}`")]
    DuplicateSchema(String),
    #[error("duplicate predicate `{0}`")]
    DuplicatePredicate(String),
    #[error("duplicate parameter `{param}` in `{owner}`")]
    DuplicateParameter { owner: String, param: String },
    #[error("undeclared predicate `{predicate}` in `{context}`")]
    UndeclaredPredicate { predicate: String, context: String },
    #[error("`{atom}` has {found} arguments, predicate expects {expected}")]
    ArityMismatch {
        atom: String,
        expected: usize,
        found: usize,
    },
    #[error("variable `{var}` in `{action}` is not a parameter")]
    UnboundVariable { action: String, var: String },
    #[error("unknown object or constant `{name}` in `{atom}`")]
    UnknownObject { name: String, atom: String },
    #[error("unknown type `{0}`")]
    UnknownType(String),
    #[error("type hierarchy has a cycle through `{0}`")]
    TypeCycle(String),
    #[error("ill-typed atom `{atom}`: `{arg}` is not a `{expected}`")]
    TypeMismatch {
        atom: String,
        arg: String,
        expected: String,
    },
    #[error("schema `{action}` both adds and deletes `{atom}`")]
    AddDeleteOverlap { action: String, atom: String },
    #[error("init must contain only ground positive atoms, found `{0}`")]
    NonGroundInit(String),
    #[error("goal literal `{0}` is not ground")]
    NonGroundGoal(String),
    #[error("soft goal `{atom}` has invalid penalty {penalty}")]
    InvalidPenalty { atom: String, penalty: f64 },
    #[error("penalty {0} is not representable in the chosen cost type")]
    UnrepresentableCost(f64),
    #[error("empty identifier")]
    EmptyName,
    #[error("precondition `{atom}` of `{action}` does not hold")]
    PreconditionUnmet { action: String, atom: String },
}

/// A name with a declared type: action/predicate parameters, objects and
/// constants all use this shape.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypedName {
    pub name: String,
    pub type_name: String,
}

impl TypedName {
    pub fn new(name: impl Into<String>, type_name: impl Into<String>) -> Self {
        TypedName {
            name: name.into(),
            type_name: type_name.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Predicate {
    pub name: String,
    pub params: Vec<TypedName>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionSchema {
    pub name: String,
    pub params: Vec<TypedName>,
    pub preconditions: Vec<Literal>,
    pub add_effects: Vec<Atom>,
    pub delete_effects: Vec<Atom>,
}

impl ActionSchema {
    pub fn param(&self, var: &str) -> Option<&TypedName> {
        self.params.iter().find(|p| p.name == var)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Domain {
    pub name: String,
    pub requirements: Vec<String>,
    /// Declared types with their parent; `object` is implicit.
    pub types: Vec<TypedName>,
    pub constants: Vec<TypedName>,
    pub predicates: Vec<Predicate>,
    pub actions: Vec<ActionSchema>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftGoal {
    pub atom: Atom,
    pub penalty: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    pub name: String,
    pub domain_name: String,
    pub objects: Vec<TypedName>,
    pub init: Vec<Atom>,
    pub goal: Vec<Literal>,
    pub soft_goals: Vec<SoftGoal>,
}

/// Parent links of a domain's type tree.
#[derive(Debug, Clone)]
pub struct TypeHierarchy {
    parents: BTreeMap<String, String>,
}

impl TypeHierarchy {
    pub fn new(types: &[TypedName]) -> Result<Self, ModelError> {
        let mut parents = BTreeMap::new();
        for t in types {
            if t.name != ROOT_TYPE {
                parents.insert(t.name.clone(), t.type_name.clone());
            }
        }
        for parent in parents.values() {
            if parent != ROOT_TYPE && !parents.contains_key(parent) {
                return Err(ModelError::UnknownType(parent.clone()));
            }
        }
        for start in parents.keys() {
            let mut seen = HashSet::new();
            let mut current = start.as_str();
            while current != ROOT_TYPE {
                if !seen.insert(current) {
                    return Err(ModelError::TypeCycle(start.clone()));
                }
                current = &parents[current];
            }
        }
        Ok(TypeHierarchy { parents })
    }

    pub fn contains(&self, name: &str) -> bool {
        name == ROOT_TYPE || self.parents.contains_key(name)
    }

    pub fn is_subtype(&self, ty: &str, ancestor: &str) -> bool {
        if ancestor == ROOT_TYPE {
            return true;
        }
        let mut current = ty;
        loop {
            if current == ancestor {
                return true;
            }
            match self.parents.get(current) {
                Some(parent) => current = parent,
                None => return false,
            }
        }
    }
}

fn check_unique_params(owner: &str, params: &[TypedName]) -> Result<(), ModelError> {
    let mut seen = HashSet::new();
    for p in params {
        if !seen.insert(p.name.as_str()) {
            return Err(ModelError::DuplicateParameter {
                owner: owner.to_string(),
                param: p.name.clone(),
            });
        }
    }
    Ok(())
}

impl Domain {
    pub fn type_hierarchy(&self) -> Result<TypeHierarchy, ModelError> {
        TypeHierarchy::new(&self.types)
    }

    pub fn predicate(&self, name: &str) -> Option<&Predicate> {
        self.predicates.iter().find(|p| p.name == name)
    }

    pub fn action(&self, name: &str) -> Option<&ActionSchema> {
        self.actions.iter().find(|a| a.name == name)
    }

    pub fn constant(&self, name: &str) -> Option<&TypedName> {
        self.constants.iter().find(|c| c.name == name)
    }

    /// Checks every structural invariant of the domain.
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.name.is_empty() {
            return Err(ModelError::EmptyName);
        }
        let types = self.type_hierarchy()?;
        let mut predicate_names = HashSet::new();
        for p in &self.predicates {
            if p.name.is_empty() {
                return Err(ModelError::EmptyName);
            }
            if !predicate_names.insert(p.name.as_str()) {
                return Err(ModelError::DuplicatePredicate(p.name.clone()));
            }
            check_unique_params(&p.name, &p.params)?;
            for param in &p.params {
                if !types.contains(&param.type_name) {
                    return Err(ModelError::UnknownType(param.type_name.clone()));
                }
            }
        }
        for c in &self.constants {
            if !types.contains(&c.type_name) {
                return Err(ModelError::UnknownType(c.type_name.clone()));
            }
        }
        let mut action_names = HashSet::new();
        for action in &self.actions {
            if action.name.is_empty() {
                return Err(ModelError::EmptyName);
            }
            if !action_names.insert(action.name.as_str()) {
                return Err(ModelError::DuplicateSchema(action.name.clone()));
            }
            self.validate_action(action, &types)?;
        }
        Ok(())
    }

    /// Checks one schema against this domain's predicates, types and constants.
    pub fn validate_action(
        &self,
        action: &ActionSchema,
        types: &TypeHierarchy,
    ) -> Result<(), ModelError> {
        check_unique_params(&action.name, &action.params)?;
        for param in &action.params {
            if !types.contains(&param.type_name) {
                return Err(ModelError::UnknownType(param.type_name.clone()));
            }
        }
        let atoms = action
            .preconditions
            .iter()
            .map(|l| &l.atom)
            .chain(&action.add_effects)
            .chain(&action.delete_effects);
        for atom in atoms {
            let predicate =
                self.predicate(&atom.predicate)
                    .ok_or_else(|| ModelError::UndeclaredPredicate {
                        predicate: atom.predicate.clone(),
                        context: action.name.clone(),
                    })?;
            if predicate.params.len() != atom.args.len() {
                return Err(ModelError::ArityMismatch {
                    atom: atom.to_string(),
                    expected: predicate.params.len(),
                    found: atom.args.len(),
                });
            }
            for (arg, expected) in atom.args.iter().zip(&predicate.params) {
                let arg_type = if is_variable(arg) {
                    &action
                        .param(arg)
                        .ok_or_else(|| ModelError::UnboundVariable {
                            action: action.name.clone(),
                            var: arg.clone(),
                        })?
                        .type_name
                } else {
                    &self
                        .constant(arg)
                        .ok_or_else(|| ModelError::UnknownObject {
                            name: arg.clone(),
                            atom: atom.to_string(),
                        })?
                        .type_name
                };
                // A parameter of a supertype may still bind to a well-typed
                // object, so only reject when the types are unrelated.
                if !types.is_subtype(arg_type, &expected.type_name)
                    && !types.is_subtype(&expected.type_name, arg_type)
                {
                    return Err(ModelError::TypeMismatch {
                        atom: atom.to_string(),
                        arg: arg.clone(),
                        expected: expected.type_name.clone(),
                    });
                }
            }
        }
        let adds: HashSet<&Atom> = action.add_effects.iter().collect();
        if let Some(overlap) = action.delete_effects.iter().find(|a| adds.contains(a)) {
            return Err(ModelError::AddDeleteOverlap {
                action: action.name.clone(),
                atom: overlap.to_string(),
            });
        }
        Ok(())
    }
}

impl Problem {
    /// All objects visible to the problem: domain constants first, then
    /// problem objects, keyed by name.
    pub fn object_types<'a>(&'a self, domain: &'a Domain) -> BTreeMap<&'a str, &'a str> {
        domain
            .constants
            .iter()
            .chain(&self.objects)
            .map(|o| (o.name.as_str(), o.type_name.as_str()))
            .collect()
    }

    /// Checks that every atom is declared, ground and well-typed.
    pub fn validate(&self, domain: &Domain) -> Result<(), ModelError> {
        let types = domain.type_hierarchy()?;
        for o in &self.objects {
            if !types.contains(&o.type_name) {
                return Err(ModelError::UnknownType(o.type_name.clone()));
            }
        }
        let objects = self.object_types(domain);
        for atom in &self.init {
            if atom.args.iter().any(|a| is_variable(a)) {
                return Err(ModelError::NonGroundInit(atom.to_string()));
            }
            check_ground_atom(domain, &types, &objects, atom)?;
        }
        for literal in &self.goal {
            if literal.atom.args.iter().any(|a| is_variable(a)) {
                return Err(ModelError::NonGroundGoal(literal.to_string()));
            }
            check_ground_atom(domain, &types, &objects, &literal.atom)?;
        }
        for soft in &self.soft_goals {
            if !soft.penalty.is_finite() || soft.penalty < 0.0 {
                return Err(ModelError::InvalidPenalty {
                    atom: soft.atom.to_string(),
                    penalty: soft.penalty,
                });
            }
            check_ground_atom(domain, &types, &objects, &soft.atom)?;
        }
        Ok(())
    }

    /// Hard goal atoms that must be true.
    pub fn positive_goal(&self) -> impl Iterator<Item = &Atom> {
        self.goal.iter().filter(|l| l.positive).map(|l| &l.atom)
    }

    pub fn init_set(&self) -> BTreeSet<&Atom> {
        self.init.iter().collect()
    }
}

pub(crate) fn check_ground_atom(
    domain: &Domain,
    types: &TypeHierarchy,
    objects: &BTreeMap<&str, &str>,
    atom: &Atom,
) -> Result<(), ModelError> {
    let predicate =
        domain
            .predicate(&atom.predicate)
            .ok_or_else(|| ModelError::UndeclaredPredicate {
                predicate: atom.predicate.clone(),
                context: "problem".to_string(),
            })?;
    if predicate.params.len() != atom.args.len() {
        return Err(ModelError::ArityMismatch {
            atom: atom.to_string(),
            expected: predicate.params.len(),
            found: atom.args.len(),
        });
    }
    for (arg, param) in atom.args.iter().zip(&predicate.params) {
        let ty = objects
            .get(arg.as_str())
            .ok_or_else(|| ModelError::UnknownObject {
                name: arg.clone(),
                atom: atom.to_string(),
            })?;
        if !types.is_subtype(ty, &param.type_name) {
            return Err(ModelError::TypeMismatch {
                atom: atom.to_string(),
                arg: arg.clone(),
                expected: param.type_name.clone(),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_domain() -> Domain {
        Domain {
            name: "d".into(),
            requirements: vec![],
            types: vec![TypedName::new("block", "object")],
            constants: vec![],
            predicates: vec![Predicate {
                name: "p".into(),
                params: vec![TypedName::new("?x", "block")],
            }],
            actions: vec![ActionSchema {
                name: "a".into(),
                params: vec![TypedName::new("?x", "block")],
                preconditions: vec![Literal::pos(Atom::new("p", ["?x"]))],
                add_effects: vec![],
                delete_effects: vec![Atom::new("p", ["?x"])],
            }],
        }
    }

    #[test]
    fn valid_domain_passes() {
        tiny_domain().validate().unwrap();
    }

    #[test]
    fn duplicate_schema_rejected() {
        let mut d = tiny_domain();
        d.actions.push(d.actions[0].clone());
        assert_eq!(d.validate(), Err(ModelError::DuplicateSchema("a".into())));
    }

    #[test]
    fn unbound_variable_rejected() {
        let mut d = tiny_domain();
        d.actions[0].add_effects.push(Atom::new("p", ["?y"]));
        assert!(matches!(
            d.validate(),
            Err(ModelError::UnboundVariable { .. })
        ));
    }

    #[test]
    fn add_delete_overlap_rejected() {
        let mut d = tiny_domain();
        d.actions[0].add_effects.push(Atom::new("p", ["?x"]));
        assert!(matches!(
            d.validate(),
            Err(ModelError::AddDeleteOverlap { .. })
        ));
    }

    #[test]
    fn type_cycle_rejected() {
        let types = vec![TypedName::new("a", "b"), TypedName::new("b", "a")];
        assert!(matches!(
            TypeHierarchy::new(&types),
            Err(ModelError::TypeCycle(_))
        ));
    }

    #[test]
    fn subtype_walks_to_root() {
        let h = TypeHierarchy::new(&[
            TypedName::new("item", "object"),
            TypedName::new("bottle", "item"),
        ])
        .unwrap();
        assert!(h.is_subtype("bottle", "item"));
        assert!(h.is_subtype("bottle", "object"));
        assert!(!h.is_subtype("item", "bottle"));
    }

    #[test]
    fn problem_rejects_unknown_object_and_bad_penalty() {
        let d = tiny_domain();
        let mut p = Problem {
            name: "p".into(),
            domain_name: "d".into(),
            objects: vec![TypedName::new("b1", "block")],
            init: vec![Atom::new("p", ["b2"])],
            goal: vec![],
            soft_goals: vec![],
        };
        assert!(matches!(
            p.validate(&d),
            Err(ModelError::UnknownObject { .. })
        ));
        p.init = vec![Atom::new("p", ["b1"])];
        p.soft_goals.push(SoftGoal {
            atom: Atom::new("p", ["b1"]),
            penalty: -1.0,
        });
        assert!(matches!(
            p.validate(&d),
            Err(ModelError::InvalidPenalty { .. })
        ));
    }
}
