use std::collections::{BTreeMap, HashMap};
use std::fmt;

use super::{is_variable, Atom, Domain, GroundState, ModelError, Problem};
use crate::num::CostScalar;

/// A fully instantiated operator over a grounding's atom table.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundAction<C> {
    pub name: String,
    pub args: Vec<String>,
    pub preconditions: Vec<usize>,
    pub negative_preconditions: Vec<usize>,
    pub add: Vec<usize>,
    pub delete: Vec<usize>,
    pub cost: C,
}

impl<C> fmt::Display for GroundAction<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.name, self.args.join(","))
    }
}

impl<C> GroundAction<C> {
    pub fn label(&self) -> String {
        self.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoftGoalIndex<C> {
    pub atom: usize,
    pub penalty: C,
}

/// The grounded form of a (domain, problem) pair. Immutable once built.
#[derive(Debug, Clone)]
pub struct GroundTask<C> {
    atoms: Vec<Atom>,
    atom_index: HashMap<Atom, usize>,
    actions: Vec<GroundAction<C>>,
    achievers: Vec<Vec<usize>>,
    pub init: GroundState,
    pub goal: Vec<usize>,
    pub negative_goal: Vec<usize>,
    pub soft_goals: Vec<SoftGoalIndex<C>>,
}

impl<C: CostScalar> GroundTask<C> {
    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn atom(&self, index: usize) -> &Atom {
        &self.atoms[index]
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn index_of(&self, atom: &Atom) -> Option<usize> {
        self.atom_index.get(atom).copied()
    }

    pub fn actions(&self) -> &[GroundAction<C>] {
        &self.actions
    }

    /// Indices of actions whose add-effects contain `atom`.
    pub fn achievers(&self, atom: usize) -> &[usize] {
        &self.achievers[atom]
    }

    pub fn find_action(&self, name: &str, args: &[String]) -> Option<usize> {
        self.actions
            .iter()
            .position(|a| a.name == name && a.args == args)
    }

    pub fn applicable(&self, state: &GroundState, action: &GroundAction<C>) -> bool {
        action.preconditions.iter().all(|&p| state.contains(p))
            && action.negative_preconditions.iter().all(|&p| !state.contains(p))
    }

    /// `(state \ delete) ∪ add`, or the first unmet precondition.
    pub fn apply(
        &self,
        state: &GroundState,
        action: &GroundAction<C>,
    ) -> Result<GroundState, ModelError> {
        let unmet = |atom: String| ModelError::PreconditionUnmet {
            action: action.label(),
            atom,
        };
        if let Some(&p) = action.preconditions.iter().find(|&&p| !state.contains(p)) {
            return Err(unmet(self.atoms[p].to_string()));
        }
        if let Some(&p) = action
            .negative_preconditions
            .iter()
            .find(|&&p| state.contains(p))
        {
            return Err(unmet(format!("not({})", self.atoms[p])));
        }
        Ok(self.successor(state, action))
    }

    /// Applies effects without checking preconditions.
    pub fn successor(&self, state: &GroundState, action: &GroundAction<C>) -> GroundState {
        let mut next = state.clone();
        for &d in &action.delete {
            next.remove(d);
        }
        for &a in &action.add {
            next.insert(a);
        }
        next
    }

    pub fn is_goal(&self, state: &GroundState) -> bool {
        self.goal.iter().all(|&g| state.contains(g))
            && self.negative_goal.iter().all(|&g| !state.contains(g))
    }

    /// Replays `plan` from the initial state, or the first step that does not
    /// name an applicable ground action.
    pub fn replay(&self, plan: &crate::plan::Plan) -> Result<GroundState, usize> {
        let mut state = self.init.clone();
        for (i, step) in plan.steps.iter().enumerate() {
            let a = self.find_action(&step.action, &step.args).ok_or(i)?;
            state = self.apply(&state, &self.actions[a]).map_err(|_| i)?;
        }
        Ok(state)
    }

    /// Returns a copy of this task with a different hard goal.
    pub fn with_goal(&self, goal: Vec<usize>, negative_goal: Vec<usize>) -> Self {
        GroundTask {
            goal,
            negative_goal,
            ..self.clone()
        }
    }
}

/// Grounds every type-consistent instantiation of every schema.
///
/// The atom table holds every well-typed atom of every predicate, sorted by
/// predicate name and then arguments. Actions are sorted by name and then
/// arguments, so two calls on equal inputs agree exactly.
pub fn ground<C: CostScalar>(domain: &Domain, problem: &Problem) -> Result<GroundTask<C>, ModelError> {
    domain.validate()?;
    problem.validate(domain)?;
    let types = domain.type_hierarchy()?;

    let mut objects: BTreeMap<&str, &str> = problem.object_types(domain);
    objects.retain(|name, _| !name.is_empty());
    let objects_of = |ty: &str| -> Vec<String> {
        objects
            .iter()
            .filter(|(_, t)| types.is_subtype(t, ty))
            .map(|(name, _)| name.to_string())
            .collect()
    };

    let mut atoms = Vec::new();
    for predicate in &domain.predicates {
        let domains: Vec<Vec<String>> = predicate
            .params
            .iter()
            .map(|p| objects_of(&p.type_name))
            .collect();
        for args in cartesian(&domains) {
            atoms.push(Atom {
                predicate: predicate.name.clone(),
                args,
            });
        }
    }
    atoms.sort();
    atoms.dedup();
    let atom_index: HashMap<Atom, usize> =
        atoms.iter().enumerate().map(|(i, a)| (a.clone(), i)).collect();

    let mut actions = Vec::new();
    for schema in &domain.actions {
        let domains: Vec<Vec<String>> = schema
            .params
            .iter()
            .map(|p| objects_of(&p.type_name))
            .collect();
        'binding: for args in cartesian(&domains) {
            let lookup = |atom: &Atom| -> Option<usize> {
                let ground = Atom {
                    predicate: atom.predicate.clone(),
                    args: atom
                        .args
                        .iter()
                        .map(|t| {
                            if is_variable(t) {
                                let pos = schema.params.iter().position(|p| &p.name == t);
                                pos.map(|i| args[i].clone()).unwrap_or_else(|| t.clone())
                            } else {
                                t.clone()
                            }
                        })
                        .collect(),
                };
                atom_index.get(&ground).copied()
            };
            let mut preconditions = Vec::new();
            let mut negative_preconditions = Vec::new();
            for literal in &schema.preconditions {
                let Some(i) = lookup(&literal.atom) else {
                    // an ill-typed atom never holds
                    if literal.positive {
                        continue 'binding;
                    }
                    continue;
                };
                if literal.positive {
                    preconditions.push(i);
                } else {
                    negative_preconditions.push(i);
                }
            }
            let mut add = Vec::new();
            for atom in &schema.add_effects {
                let Some(i) = lookup(atom) else {
                    continue 'binding;
                };
                add.push(i);
            }
            let mut delete = Vec::new();
            for atom in &schema.delete_effects {
                let Some(i) = lookup(atom) else {
                    continue 'binding;
                };
                delete.push(i);
            }
            for v in [&mut preconditions, &mut negative_preconditions, &mut add, &mut delete] {
                v.sort_unstable();
                v.dedup();
            }
            // When a binding makes an atom both added and deleted, the add wins.
            delete.retain(|d| !add.contains(d));
            actions.push(GroundAction {
                name: schema.name.clone(),
                args,
                preconditions,
                negative_preconditions,
                add,
                delete,
                cost: C::one(),
            });
        }
    }
    actions.sort_by(|a, b| (&a.name, &a.args).cmp(&(&b.name, &b.args)));

    let mut achievers = vec![Vec::new(); atoms.len()];
    for (i, action) in actions.iter().enumerate() {
        for &a in &action.add {
            achievers[a].push(i);
        }
    }

    let index = |atom: &Atom| -> Result<usize, ModelError> {
        atom_index
            .get(atom)
            .copied()
            .ok_or_else(|| ModelError::UnknownObject {
                name: atom.args.join(","),
                atom: atom.to_string(),
            })
    };
    let init = GroundState::from_indices(
        atoms.len(),
        problem.init.iter().map(index).collect::<Result<Vec<_>, _>>()?,
    );
    let mut goal = Vec::new();
    let mut negative_goal = Vec::new();
    for literal in &problem.goal {
        let i = index(&literal.atom)?;
        if literal.positive {
            goal.push(i);
        } else {
            negative_goal.push(i);
        }
    }
    goal.sort_unstable();
    goal.dedup();
    negative_goal.sort_unstable();
    negative_goal.dedup();
    let soft_goals = problem
        .soft_goals
        .iter()
        .map(|s| {
            Ok(SoftGoalIndex {
                atom: index(&s.atom)?,
                penalty: C::from_exact(s.penalty)
                    .ok_or(ModelError::UnrepresentableCost(s.penalty))?,
            })
        })
        .collect::<Result<Vec<_>, ModelError>>()?;

    Ok(GroundTask {
        atoms,
        atom_index,
        actions,
        achievers,
        init,
        goal,
        negative_goal,
        soft_goals,
    })
}

fn cartesian(domains: &[Vec<String>]) -> Vec<Vec<String>> {
    let mut out = vec![Vec::new()];
    for values in domains {
        let mut next = Vec::with_capacity(out.len() * values.len());
        for prefix in &out {
            for v in values {
                let mut row = prefix.clone();
                row.push(v.clone());
                next.push(row);
            }
        }
        out = next;
    }
    out
}
