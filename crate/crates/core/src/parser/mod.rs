//! Reader and printer for the PDDL subset used by the planner
//! (`:strips`, `:typing`, `:negative-preconditions`), plus the soft-goal
//! sidecar document.

mod sexpr;

use std::collections::HashSet;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    is_variable, ActionSchema, Atom, Domain, Literal, ModelError, Predicate, Problem, SoftGoal,
    TypedName, ROOT_TYPE,
};
use sexpr::{read_one, SExpr};

pub const SUPPORTED_REQUIREMENTS: [&str; 3] = ["strips", "typing", "negative-preconditions"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceSpan {
    pub file: String,
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("{span}: {message}")]
    Syntax { message: String, span: SourceSpan },
    #[error("{span}: duplicate action schema `{name}`")]
    DuplicateSchema { name: String, span: SourceSpan },
    #[error("{span}: undeclared predicate `{name}`")]
    UndeclaredPredicate { name: String, span: SourceSpan },
    #[error("{span}: unsupported requirement `:{name}`")]
    UnsupportedRequirement { name: String, span: SourceSpan },
    #[error("invalid model: {0}")]
    Model(#[from] ModelError),
    #[error("soft-goal document: {0}")]
    SoftGoals(String),
}

impl ParseError {
    pub(crate) fn syntax(message: impl Into<String>, span: SourceSpan) -> Self {
        ParseError::Syntax {
            message: message.into(),
            span,
        }
    }
}

type Result<T, E = ParseError> = std::result::Result<T, E>;

fn expect_list<'a>(e: &'a SExpr, what: &str) -> Result<&'a [SExpr]> {
    e.as_list()
        .ok_or_else(|| ParseError::syntax(format!("expected {what}"), e.span().clone()))
}

fn expect_symbol<'a>(e: &'a SExpr, what: &str) -> Result<&'a str> {
    e.as_symbol()
        .ok_or_else(|| ParseError::syntax(format!("expected {what}"), e.span().clone()))
}

/// Splits a `(define (KIND NAME) sections...)` form.
fn define_form<'a>(e: &'a SExpr, kind: &str) -> Result<(&'a str, &'a [SExpr])> {
    let items = expect_list(e, "`(define ...)`")?;
    match items.first().and_then(SExpr::as_symbol) {
        Some("define") => {}
        _ => return Err(ParseError::syntax("expected `define`", e.span().clone())),
    }
    let header = items
        .get(1)
        .ok_or_else(|| ParseError::syntax(format!("missing `({kind} ...)`"), e.span().clone()))?;
    let header_items = expect_list(header, &format!("`({kind} NAME)`"))?;
    match header_items {
        [k, name] if k.as_symbol() == Some(kind) => Ok((expect_symbol(name, "name")?, &items[2..])),
        _ => Err(ParseError::syntax(
            format!("expected `({kind} NAME)`"),
            header.span().clone(),
        )),
    }
}

/// Parses `a b - t c - u d` into typed names; untyped names default to `object`.
fn typed_list(items: &[SExpr]) -> Result<Vec<TypedName>> {
    let mut out = Vec::new();
    let mut pending: Vec<String> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let sym = expect_symbol(&items[i], "a name")?;
        if sym == "-" {
            let ty = items
                .get(i + 1)
                .ok_or_else(|| ParseError::syntax("missing type after `-`", items[i].span().clone()))?;
            let ty = expect_symbol(ty, "a type name")?;
            if pending.is_empty() {
                return Err(ParseError::syntax("`-` without names", items[i].span().clone()));
            }
            out.extend(pending.drain(..).map(|n| TypedName::new(n, ty)));
            i += 2;
        } else {
            pending.push(sym.to_string());
            i += 1;
        }
    }
    out.extend(pending.into_iter().map(|n| TypedName::new(n, ROOT_TYPE)));
    Ok(out)
}

fn parse_atom(e: &SExpr) -> Result<Atom> {
    let items = expect_list(e, "an atom")?;
    let (head, rest) = items
        .split_first()
        .ok_or_else(|| ParseError::syntax("empty atom", e.span().clone()))?;
    let predicate = expect_symbol(head, "a predicate name")?;
    if predicate == "and" || predicate == "not" {
        return Err(ParseError::syntax(
            format!("unexpected `{predicate}`"),
            head.span().clone(),
        ));
    }
    let args = rest
        .iter()
        .map(|a| expect_symbol(a, "a term").map(str::to_string))
        .collect::<Result<Vec<_>>>()?;
    Ok(Atom {
        predicate: predicate.to_string(),
        args,
    })
}

fn parse_literal(e: &SExpr) -> Result<Literal> {
    let items = expect_list(e, "a literal")?;
    if items.first().and_then(SExpr::as_symbol) == Some("not") {
        match items {
            [_, inner] => Ok(Literal::neg(parse_atom(inner)?)),
            _ => Err(ParseError::syntax("`not` takes one atom", e.span().clone())),
        }
    } else {
        Ok(Literal::pos(parse_atom(e)?))
    }
}

/// `()`, a single literal, or `(and literal*)`.
fn conjunction(e: &SExpr) -> Result<Vec<Literal>> {
    let items = expect_list(e, "a condition")?;
    match items.first().and_then(SExpr::as_symbol) {
        None if items.is_empty() => Ok(Vec::new()),
        Some("and") => items[1..].iter().map(parse_literal).collect(),
        Some("or" | "imply" | "exists" | "forall" | "when" | "=") => Err(ParseError::syntax(
            "only conjunctions of literals are supported",
            e.span().clone(),
        )),
        _ => Ok(vec![parse_literal(e)?]),
    }
}

fn check_predicates(domain_predicates: &[Predicate], literals: &[(Literal, SourceSpan)]) -> Result<()> {
    for (l, span) in literals {
        if !domain_predicates.iter().any(|p| p.name == l.atom.predicate) {
            return Err(ParseError::UndeclaredPredicate {
                name: l.atom.predicate.clone(),
                span: span.clone(),
            });
        }
    }
    Ok(())
}

/// Literals with the span of the expression they came from.
fn spanned_conjunction(e: &SExpr) -> Result<Vec<(Literal, SourceSpan)>> {
    let literals = conjunction(e)?;
    let spans: Vec<SourceSpan> = match e.as_list() {
        Some(items) if items.first().and_then(SExpr::as_symbol) == Some("and") => {
            items[1..].iter().map(|i| i.span().clone()).collect()
        }
        _ => vec![e.span().clone(); literals.len()],
    };
    Ok(literals.into_iter().zip(spans).collect())
}

fn parse_action_form(items: &[SExpr], span: &SourceSpan) -> Result<ActionSchema> {
    let name = items
        .get(1)
        .ok_or_else(|| ParseError::syntax("missing action name", span.clone()))?;
    let name = expect_symbol(name, "an action name")?.to_string();
    let mut action = ActionSchema {
        name,
        params: Vec::new(),
        preconditions: Vec::new(),
        add_effects: Vec::new(),
        delete_effects: Vec::new(),
    };
    let mut i = 2;
    while i < items.len() {
        let key = expect_symbol(&items[i], "an action keyword")?;
        let value = items.get(i + 1).ok_or_else(|| {
            ParseError::syntax(format!("missing value for `{key}`"), items[i].span().clone())
        })?;
        match key {
            ":parameters" => {
                action.params = typed_list(expect_list(value, "a parameter list")?)?;
                if let Some(p) = action.params.iter().find(|p| !is_variable(&p.name)) {
                    return Err(ParseError::syntax(
                        format!("parameter `{}` must start with `?`", p.name),
                        value.span().clone(),
                    ));
                }
            }
            ":precondition" => action.preconditions = conjunction(value)?,
            ":effect" => {
                for literal in conjunction(value)? {
                    if literal.positive {
                        action.add_effects.push(literal.atom);
                    } else {
                        action.delete_effects.push(literal.atom);
                    }
                }
            }
            other => {
                return Err(ParseError::syntax(
                    format!("unsupported action keyword `{other}`"),
                    items[i].span().clone(),
                ))
            }
        }
        i += 2;
    }
    Ok(action)
}

/// Parses a standalone `(:action ...)` form. Only syntax is checked; the
/// schema is validated against a domain when it is added to one.
pub fn parse_action(text: &str) -> Result<ActionSchema> {
    let e = read_one("<action>", text)?;
    let items = expect_list(&e, "`(:action ...)`")?;
    if items.first().and_then(SExpr::as_symbol) != Some(":action") {
        return Err(ParseError::syntax("expected `(:action ...)`", e.span().clone()));
    }
    parse_action_form(items, e.span())
}

pub fn parse_domain(text: &str) -> Result<Domain> {
    parse_domain_from("<domain>", text)
}

/// Like [`parse_domain`], naming `source` in diagnostics.
pub fn parse_domain_from(source: &str, text: &str) -> Result<Domain> {
    let root = read_one(source, text)?;
    let (name, sections) = define_form(&root, "domain")?;
    let mut domain = Domain {
        name: name.to_string(),
        requirements: Vec::new(),
        types: Vec::new(),
        constants: Vec::new(),
        predicates: Vec::new(),
        actions: Vec::new(),
    };
    let mut action_spans = Vec::new();
    for section in sections {
        let items = expect_list(section, "a domain section")?;
        let key = items
            .first()
            .ok_or_else(|| ParseError::syntax("empty section", section.span().clone()))?;
        match expect_symbol(key, "a section keyword")? {
            ":requirements" => {
                for r in &items[1..] {
                    let flag = expect_symbol(r, "a requirement")?;
                    let flag = flag.strip_prefix(':').unwrap_or(flag);
                    if !SUPPORTED_REQUIREMENTS.contains(&flag) {
                        return Err(ParseError::UnsupportedRequirement {
                            name: flag.to_string(),
                            span: r.span().clone(),
                        });
                    }
                    domain.requirements.push(flag.to_string());
                }
            }
            ":types" => domain.types.extend(typed_list(&items[1..])?),
            ":constants" => domain.constants.extend(typed_list(&items[1..])?),
            ":predicates" => {
                for p in &items[1..] {
                    let parts = expect_list(p, "a predicate declaration")?;
                    let (head, params) = parts
                        .split_first()
                        .ok_or_else(|| ParseError::syntax("empty predicate", p.span().clone()))?;
                    domain.predicates.push(Predicate {
                        name: expect_symbol(head, "a predicate name")?.to_string(),
                        params: typed_list(params)?,
                    });
                }
            }
            ":action" => {
                let action = parse_action_form(items, section.span())?;
                if domain.actions.iter().any(|a| a.name == action.name) {
                    return Err(ParseError::DuplicateSchema {
                        name: action.name,
                        span: section.span().clone(),
                    });
                }
                action_spans.push(section);
                domain.actions.push(action);
            }
            other => {
                return Err(ParseError::syntax(
                    format!("unsupported domain section `{other}`"),
                    key.span().clone(),
                ))
            }
        }
    }
    for section in &action_spans {
        let items = section.as_list().unwrap_or_default();
        let mut literals = Vec::new();
        for pair in items[2..].chunks(2) {
            if let [key, value] = pair {
                if matches!(key.as_symbol(), Some(":precondition" | ":effect")) {
                    literals.extend(spanned_conjunction(value)?);
                }
            }
        }
        check_predicates(&domain.predicates, &literals)?;
    }
    domain.validate()?;
    Ok(domain)
}

pub fn parse_problem(text: &str, domain: &Domain) -> Result<Problem> {
    parse_problem_from("<problem>", text, domain)
}

pub fn parse_problem_from(source: &str, text: &str, domain: &Domain) -> Result<Problem> {
    let root = read_one(source, text)?;
    let (name, sections) = define_form(&root, "problem")?;
    let mut problem = Problem {
        name: name.to_string(),
        domain_name: String::new(),
        objects: Vec::new(),
        init: Vec::new(),
        goal: Vec::new(),
        soft_goals: Vec::new(),
    };
    for section in sections {
        let items = expect_list(section, "a problem section")?;
        let key = items
            .first()
            .ok_or_else(|| ParseError::syntax("empty section", section.span().clone()))?;
        match expect_symbol(key, "a section keyword")? {
            ":domain" => match &items[1..] {
                [d] => problem.domain_name = expect_symbol(d, "a domain name")?.to_string(),
                _ => return Err(ParseError::syntax("expected `(:domain NAME)`", section.span().clone())),
            },
            ":objects" => problem.objects.extend(typed_list(&items[1..])?),
            ":init" => {
                for a in &items[1..] {
                    let literal = parse_literal(a)?;
                    if !literal.positive {
                        return Err(ParseError::syntax(
                            "init may contain only positive atoms",
                            a.span().clone(),
                        ));
                    }
                    check_predicates(&domain.predicates, &[(literal.clone(), a.span().clone())])?;
                    problem.init.push(literal.atom);
                }
            }
            ":goal" => match &items[1..] {
                [g] => {
                    let literals = spanned_conjunction(g)?;
                    check_predicates(&domain.predicates, &literals)?;
                    problem.goal = literals.into_iter().map(|(l, _)| l).collect();
                }
                _ => return Err(ParseError::syntax("expected `(:goal CONDITION)`", section.span().clone())),
            },
            other => {
                return Err(ParseError::syntax(
                    format!("unsupported problem section `{other}`"),
                    key.span().clone(),
                ))
            }
        }
    }
    if problem.domain_name != domain.name {
        return Err(ParseError::syntax(
            format!(
                "problem is for domain `{}`, not `{}`",
                problem.domain_name, domain.name
            ),
            root.span().clone(),
        ));
    }
    problem.validate(domain)?;
    Ok(problem)
}

fn write_typed(out: &mut String, names: &[TypedName]) {
    let parts: Vec<String> = names
        .iter()
        .map(|t| format!("{} - {}", t.name, t.type_name))
        .collect();
    out.push_str(&parts.join(" "));
}

fn sexpr_atom(atom: &Atom) -> String {
    if atom.args.is_empty() {
        format!("({})", atom.predicate)
    } else {
        format!("({} {})", atom.predicate, atom.args.join(" "))
    }
}

fn sexpr_literal(literal: &Literal) -> String {
    if literal.positive {
        sexpr_atom(&literal.atom)
    } else {
        format!("(not {})", sexpr_atom(&literal.atom))
    }
}

fn sexpr_conjunction(parts: impl IntoIterator<Item = String>) -> String {
    let parts: Vec<String> = parts.into_iter().collect();
    if parts.is_empty() {
        "(and)".to_string()
    } else {
        format!("(and {})", parts.join(" "))
    }
}

pub fn print_action(action: &ActionSchema) -> String {
    let mut out = String::new();
    let _ = write!(out, "(:action {}\n    :parameters (", action.name);
    write_typed(&mut out, &action.params);
    out.push_str(")\n    :precondition ");
    out.push_str(&sexpr_conjunction(action.preconditions.iter().map(sexpr_literal)));
    out.push_str("\n    :effect ");
    out.push_str(&sexpr_conjunction(
        action
            .add_effects
            .iter()
            .map(sexpr_atom)
            .chain(action.delete_effects.iter().map(|a| format!("(not {})", sexpr_atom(a)))),
    ));
    out.push(')');
    out
}

pub fn print_domain(domain: &Domain) -> String {
    let mut out = format!("(define (domain {})\n", domain.name);
    if !domain.requirements.is_empty() {
        let flags: Vec<String> = domain.requirements.iter().map(|r| format!(":{r}")).collect();
        let _ = writeln!(out, "  (:requirements {})", flags.join(" "));
    }
    if !domain.types.is_empty() {
        out.push_str("  (:types ");
        write_typed(&mut out, &domain.types);
        out.push_str(")\n");
    }
    if !domain.constants.is_empty() {
        out.push_str("  (:constants ");
        write_typed(&mut out, &domain.constants);
        out.push_str(")\n");
    }
    out.push_str("  (:predicates");
    for p in &domain.predicates {
        let _ = write!(out, "\n    ({}", p.name);
        if !p.params.is_empty() {
            out.push(' ');
            write_typed(&mut out, &p.params);
        }
        out.push(')');
    }
    out.push_str(")\n");
    for a in &domain.actions {
        out.push_str("  ");
        out.push_str(&print_action(a).replace('\n', "\n  "));
        out.push('\n');
    }
    out.push_str(")\n");
    out
}

pub fn print_problem(problem: &Problem) -> String {
    let mut out = format!(
        "(define (problem {})\n  (:domain {})\n",
        problem.name, problem.domain_name
    );
    if !problem.objects.is_empty() {
        out.push_str("  (:objects ");
        write_typed(&mut out, &problem.objects);
        out.push_str(")\n");
    }
    out.push_str("  (:init");
    for a in &problem.init {
        let _ = write!(out, "\n    {}", sexpr_atom(a));
    }
    out.push_str(")\n  (:goal ");
    out.push_str(&sexpr_conjunction(problem.goal.iter().map(sexpr_literal)));
    out.push_str("))\n");
    out
}

#[derive(Debug, Serialize, Deserialize)]
struct SoftGoalDocument {
    soft_goals: Vec<SoftGoalEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct SoftGoalEntry {
    atom: String,
    penalty: f64,
}

/// Reads the `{"soft_goals": [{"atom": ..., "penalty": ...}]}` sidecar.
pub fn parse_soft_goals(text: &str) -> Result<Vec<SoftGoal>> {
    let doc: SoftGoalDocument =
        serde_json::from_str(text).map_err(|e| ParseError::SoftGoals(e.to_string()))?;
    let mut seen = HashSet::new();
    doc.soft_goals
        .into_iter()
        .map(|entry| {
            let atom =
                Atom::parse_compact(&entry.atom).map_err(|e| ParseError::SoftGoals(e.to_string()))?;
            if !atom.is_ground() {
                return Err(ParseError::SoftGoals(format!("`{atom}` is not ground")));
            }
            if !seen.insert(atom.clone()) {
                return Err(ParseError::SoftGoals(format!("duplicate soft goal `{atom}`")));
            }
            if !entry.penalty.is_finite() || entry.penalty < 0.0 {
                return Err(ParseError::SoftGoals(format!(
                    "penalty of `{atom}` must be a non-negative number"
                )));
            }
            Ok(SoftGoal {
                atom,
                penalty: entry.penalty,
            })
        })
        .collect()
}

pub fn print_soft_goals(soft_goals: &[SoftGoal]) -> String {
    let doc = SoftGoalDocument {
        soft_goals: soft_goals
            .iter()
            .map(|s| SoftGoalEntry {
                atom: s.atom.to_string(),
                penalty: s.penalty,
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("soft goals serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str =
        "(define (domain d) (:predicates (p)) (:action a :precondition (p) :effect (not (p))))";

    #[test]
    fn minimal_domain() {
        let d = parse_domain(MINIMAL).unwrap();
        assert_eq!(d.predicates.len(), 1);
        assert_eq!(d.actions.len(), 1);
        assert_eq!(d.actions[0].delete_effects, vec![Atom::new("p", Vec::<String>::new())]);
    }

    #[test]
    fn identifiers_are_lowercased_and_comments_skipped() {
        let d = parse_domain("; header\n(DEFINE (DOMAIN Dd) ; x\n (:predicates (P ?X)))").unwrap();
        assert_eq!(d.name, "dd");
        assert_eq!(d.predicates[0].name, "p");
        assert_eq!(d.predicates[0].params[0].name, "?x");
    }

    #[test]
    fn unsupported_requirement_rejected() {
        let err = parse_domain("(define (domain d) (:requirements :strips :fluents))").unwrap_err();
        assert!(matches!(err, ParseError::UnsupportedRequirement { ref name, .. } if name == "fluents"));
    }

    #[test]
    fn duplicate_schema_rejected_with_span() {
        let text = "(define (domain d) (:predicates (p))\n (:action a :effect (p))\n (:action a :effect (p)))";
        match parse_domain(text).unwrap_err() {
            ParseError::DuplicateSchema { name, span } => {
                assert_eq!(name, "a");
                assert_eq!(span.line, 3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn undeclared_predicate_rejected() {
        let err = parse_domain("(define (domain d) (:predicates (p)) (:action a :effect (q)))").unwrap_err();
        assert!(matches!(err, ParseError::UndeclaredPredicate { ref name, .. } if name == "q"));
    }

    #[test]
    fn syntax_error_carries_position() {
        match parse_domain("(define (domain d)\n  (:predicates (p))").unwrap_err() {
            ParseError::Syntax { span, .. } => assert!(span.line >= 1 && span.column >= 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_goal_and_empty_predicates() {
        let d = parse_domain("(define (domain d) (:predicates))").unwrap();
        assert!(d.predicates.is_empty());
        assert_eq!(parse_domain(&print_domain(&d)).unwrap(), d);
        let p = parse_problem("(define (problem p) (:domain d) (:init) (:goal (and)))", &d).unwrap();
        assert!(p.goal.is_empty());
        assert_eq!(parse_problem(&print_problem(&p), &d).unwrap(), p);
    }

    #[test]
    fn problem_errors() {
        let d = parse_domain(
            "(define (domain d) (:types block) (:predicates (p ?b - block)))",
        )
        .unwrap();
        assert!(parse_problem(
            "(define (problem x) (:domain d) (:objects a - widget) (:init) (:goal (and)))",
            &d
        )
        .is_err());
        assert!(matches!(
            parse_problem(
                "(define (problem x) (:domain d) (:objects a - block) (:init) (:goal (q a)))",
                &d
            ),
            Err(ParseError::UndeclaredPredicate { .. })
        ));
        assert!(parse_problem(
            "(define (problem x) (:domain other) (:init) (:goal (and)))",
            &d
        )
        .is_err());
    }

    #[test]
    fn standalone_action() {
        let a = parse_action(
            "(:action turn-on :parameters (?m - appliance) :precondition (and) :effect (and (on ?m)))",
        )
        .unwrap();
        assert_eq!(a.name, "turn-on");
        assert_eq!(a.add_effects.len(), 1);
        assert_eq!(parse_action(&print_action(&a)).unwrap(), a);
    }

    #[test]
    fn soft_goal_sidecar() {
        let goals =
            parse_soft_goals(r#"{"soft_goals": [{"atom": "fridge-closed(fridge)", "penalty": 2}]}"#)
                .unwrap();
        assert_eq!(goals[0].atom, Atom::new("fridge-closed", ["fridge"]));
        assert_eq!(goals[0].penalty, 2.0);
        assert_eq!(parse_soft_goals(&print_soft_goals(&goals)).unwrap(), goals);
        assert!(parse_soft_goals(r#"{"soft_goals": [{"atom": "x", "penalty": -1}]}"#).is_err());
        assert!(parse_soft_goals(r#"{"goals": []}"#).is_err());
    }
}
