//! Delete-relaxed reachability and the unsolvability certificate built on it.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::model::{Atom, GroundState, GroundTask};
use crate::num::CostScalar;

/// A precondition no action can ever establish.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OrphanPrecondition {
    pub action: String,
    pub atom: Atom,
}

/// Evidence that a task has no plan.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnsolvabilityCertificate {
    /// Goal atoms outside the delete-relaxed reachability fixpoint.
    pub unreachable_goal_atoms: Vec<Atom>,
    /// Preconditions of goal-relevant actions that are neither initially
    /// true nor added by any action.
    pub orphan_preconditions: Vec<OrphanPrecondition>,
    /// Set when exhaustive search closed every reachable state.
    pub exhausted: bool,
}

impl UnsolvabilityCertificate {
    pub fn is_conclusive(&self) -> bool {
        !self.unreachable_goal_atoms.is_empty() || self.exhausted
    }

    pub fn names_orphan(&self, action_schema: &str, atom: &Atom) -> bool {
        self.orphan_preconditions.iter().any(|o| {
            &o.atom == atom
                && o.action
                    .split('(')
                    .next()
                    .is_some_and(|name| name == action_schema)
        })
    }
}

#[derive(Debug, Clone)]
pub struct Reachability {
    pub reachable: GroundState,
    pub certificate: Option<UnsolvabilityCertificate>,
}

/// Atoms reachable from `state` ignoring deletes and negative preconditions,
/// using only actions for which `allowed` holds.
pub(crate) fn relaxed_fixpoint<C: CostScalar>(
    task: &GroundTask<C>,
    state: &GroundState,
    allowed: impl Fn(usize) -> bool,
) -> GroundState {
    let mut reached = state.clone();
    let mut fired = vec![false; task.actions().len()];
    loop {
        let mut changed = false;
        for (i, action) in task.actions().iter().enumerate() {
            if fired[i] || !allowed(i) {
                continue;
            }
            if action.preconditions.iter().all(|&p| reached.contains(p)) {
                fired[i] = true;
                for &a in &action.add {
                    if !reached.contains(a) {
                        reached.insert(a);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return reached;
        }
    }
}

/// Delete-relaxed reachability from the initial state. A certificate is
/// produced exactly when some positive goal atom is unreachable.
pub fn relaxed_reachability<C: CostScalar>(task: &GroundTask<C>) -> Reachability {
    let reachable = relaxed_fixpoint(task, &task.init, |_| true);
    let unreachable: Vec<usize> = task
        .goal
        .iter()
        .copied()
        .filter(|&g| !reachable.contains(g))
        .collect();
    let certificate = (!unreachable.is_empty()).then(|| UnsolvabilityCertificate {
        unreachable_goal_atoms: unreachable.iter().map(|&g| task.atom(g).clone()).collect(),
        orphan_preconditions: orphans(task, &reachable, &unreachable),
        exhausted: false,
    });
    Reachability {
        reachable,
        certificate,
    }
}

/// Backchains from unreachable atoms through their achievers and collects
/// the preconditions that nothing can add.
pub(crate) fn orphans<C: CostScalar>(
    task: &GroundTask<C>,
    reachable: &GroundState,
    unreachable_goals: &[usize],
) -> Vec<OrphanPrecondition> {
    let mut visited = BTreeSet::new();
    let mut stack: Vec<usize> = unreachable_goals.to_vec();
    let mut found = BTreeSet::new();
    while let Some(atom) = stack.pop() {
        if !visited.insert(atom) {
            continue;
        }
        for &a in task.achievers(atom) {
            let action = &task.actions()[a];
            for &p in &action.preconditions {
                if reachable.contains(p) {
                    continue;
                }
                if task.achievers(p).is_empty() && !task.init.contains(p) {
                    found.insert(OrphanPrecondition {
                        action: action.label(),
                        atom: task.atom(p).clone(),
                    });
                } else {
                    stack.push(p);
                }
            }
        }
    }
    found.into_iter().collect()
}

/// A certificate for a task whose reachable state space was exhausted.
pub(crate) fn exhausted_certificate<C: CostScalar>(task: &GroundTask<C>) -> UnsolvabilityCertificate {
    let reach = relaxed_reachability(task);
    let mut cert = reach.certificate.unwrap_or_default();
    cert.exhausted = true;
    cert
}
