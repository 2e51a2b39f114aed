//! Canonical cache keys for (domain, problem) pairs.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::model::{Domain, Problem};
use crate::parser::print_domain;

/// Identifier of the digest recorded in cache headers.
pub const DIGEST_ALGORITHM: &str = "sha256";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProblemSignature {
    pub domain_digest: String,
    pub problem_digest: String,
}

fn hex_digest(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    let mut out = String::with_capacity(64);
    for byte in digest.iter() {
        let _ = write!(out, "{byte:02x}");
    }
    out
}

/// The domain printed with every order-insensitive collection sorted.
pub fn normalized_domain_text(domain: &Domain) -> String {
    let mut d = domain.clone();
    d.requirements.sort();
    d.requirements.dedup();
    d.types.sort_by(|a, b| a.name.cmp(&b.name));
    d.constants.sort_by(|a, b| a.name.cmp(&b.name));
    d.predicates.sort_by(|a, b| a.name.cmp(&b.name));
    d.actions.sort_by(|a, b| a.name.cmp(&b.name));
    for action in &mut d.actions {
        action.preconditions.sort();
        action.preconditions.dedup();
        action.add_effects.sort();
        action.add_effects.dedup();
        action.delete_effects.sort();
        action.delete_effects.dedup();
    }
    print_domain(&d)
}

/// `sorted init | sorted goal literals | sorted soft goals`.
pub fn normalized_problem_text(problem: &Problem) -> String {
    let mut init: Vec<String> = problem.init.iter().map(ToString::to_string).collect();
    init.sort();
    init.dedup();
    let mut goal: Vec<String> = problem.goal.iter().map(ToString::to_string).collect();
    goal.sort();
    goal.dedup();
    let mut soft: Vec<String> = problem
        .soft_goals
        .iter()
        .map(|s| format!("{}={}", s.atom, s.penalty))
        .collect();
    soft.sort();
    format!("{}|{}|{}", init.join(","), goal.join(","), soft.join(","))
}

pub fn create_signature(domain: &Domain, problem: &Problem) -> ProblemSignature {
    ProblemSignature {
        domain_digest: hex_digest(&normalized_domain_text(domain)),
        problem_digest: hex_digest(&normalized_problem_text(problem)),
    }
}

impl fmt::Display for ProblemSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.domain_digest, self.problem_digest)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed signature `{0}`")]
pub struct SignatureSyntaxError(pub String);

impl FromStr for ProblemSignature {
    type Err = SignatureSyntaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let is_digest = |d: &str| d.len() == 64 && d.bytes().all(|b| b.is_ascii_hexdigit());
        match s.split_once(':') {
            Some((d, p)) if is_digest(d) && is_digest(p) => Ok(ProblemSignature {
                domain_digest: d.to_ascii_lowercase(),
                problem_digest: p.to_ascii_lowercase(),
            }),
            _ => Err(SignatureSyntaxError(s.to_string())),
        }
    }
}

impl Serialize for ProblemSignature {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ProblemSignature {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_domain, parse_problem};

    const DOMAIN: &str = "(define (domain d) (:predicates (p ?x) (q ?x))
        (:action a :parameters (?x) :precondition (and (p ?x) (q ?x)) :effect (not (p ?x))))";

    #[test]
    fn invariant_to_order_whitespace_and_case() {
        let d1 = parse_domain(DOMAIN).unwrap();
        let d2 = parse_domain(
            "(DEFINE (domain D)   (:predicates (q ?x) (P ?x))
             (:action A :parameters (?X) :precondition (and (Q ?X) (p ?X)) :effect (not (p ?x))))",
        )
        .unwrap();
        let p1 = parse_problem(
            "(define (problem x) (:domain d) (:objects o1 o2) (:init (p o1) (q o2)) (:goal (and (q o1) (p o2))))",
            &d1,
        )
        .unwrap();
        let p2 = parse_problem(
            "(define (problem y) (:domain d) (:objects o2 o1) (:init (q o2) (p o1)) (:goal (and (p o2) (q o1))))",
            &d2,
        )
        .unwrap();
        assert_eq!(create_signature(&d1, &p1), create_signature(&d2, &p2));
    }

    #[test]
    fn goal_change_changes_problem_digest_only() {
        let d = parse_domain(DOMAIN).unwrap();
        let p1 = parse_problem("(define (problem x) (:domain d) (:objects o) (:init (p o)) (:goal (p o)))", &d).unwrap();
        let p2 = parse_problem(
            "(define (problem x) (:domain d) (:objects o) (:init (p o)) (:goal (and (p o) (q o))))",
            &d,
        )
        .unwrap();
        let (s1, s2) = (create_signature(&d, &p1), create_signature(&d, &p2));
        assert_eq!(s1.domain_digest, s2.domain_digest);
        assert_ne!(s1.problem_digest, s2.problem_digest);
    }

    #[test]
    fn string_form_round_trips() {
        let d = parse_domain(DOMAIN).unwrap();
        let p = parse_problem("(define (problem x) (:domain d) (:init) (:goal (and)))", &d).unwrap();
        let sig = create_signature(&d, &p);
        let text = sig.to_string();
        assert_eq!(text.len(), 129);
        assert_eq!(text.parse::<ProblemSignature>().unwrap(), sig);
        assert!("abc:def".parse::<ProblemSignature>().is_err());
    }
}
