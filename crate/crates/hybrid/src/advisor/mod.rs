//! The advisor: a language-model collaborator consulted in three modes.
//!
//! * `review` checks a successful plan for commonsense omissions;
//! * `fix` rewrites a plan according to review feedback;
//! * `gap` explains why a problem is unsolvable and proposes a domain fix.
//!
//! Backends only move JSON; everything they return is checked here before it
//! reaches the caller. Plans go through the validator, fixes through
//! [`planner_core::fixes`].

mod http;
mod scripted;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use planner_core::fixes::{fix_from_value, MissingPrecondition};
use planner_core::search::UnsolvabilityCertificate;
use planner_core::validate::Verdict;
use planner_core::{validate_plan, Domain, DomainFix, FixError, Plan, Problem, ProblemSignature};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use http::{HttpAdvisor, ADVISOR_TOKEN_ENV, ADVISOR_URL_ENV};
pub use scripted::ScriptedAdvisor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdvisorMode {
    Review,
    Fix,
    Gap,
}

impl AdvisorMode {
    pub fn name(self) -> &'static str {
        match self {
            AdvisorMode::Review => "review",
            AdvisorMode::Fix => "fix",
            AdvisorMode::Gap => "gap",
        }
    }
}

impl fmt::Display for AdvisorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AdvisorMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "review" => Ok(AdvisorMode::Review),
            "fix" => Ok(AdvisorMode::Fix),
            "gap" => Ok(AdvisorMode::Gap),
            other => Err(format!("unknown advisor mode `{other}`")),
        }
    }
}

#[derive(Debug, Error)]
pub enum AdvisorError {
    #[error("advisor unavailable: {0}")]
    Unavailable(String),
    #[error("advisor reply malformed: {0}")]
    Malformed(String),
    #[error("advisor proposed an invalid plan: {verdict}")]
    FixedPlanInvalid { plan: Vec<String>, verdict: String },
    #[error("advisor proposed an unusable fix: {0}")]
    Fix(#[from] FixError),
    #[error("fix requests need non-empty feedback")]
    EmptyFeedback,
}

/// Everything a backend may need to answer one query.
#[derive(Debug, Clone, Copy)]
pub struct AdvisorRequest<'a> {
    pub mode: AdvisorMode,
    pub signature: &'a ProblemSignature,
    pub domain: &'a Domain,
    pub problem: &'a Problem,
    pub plan: Option<&'a Plan>,
    pub feedback: Option<&'a str>,
    pub certificate: Option<&'a UnsolvabilityCertificate>,
}

pub trait AdvisorBackend: Send + Sync {
    /// Short identifier recorded with cached flaws.
    fn id(&self) -> String;

    /// The raw JSON reply, or `None` when the backend has nothing to say.
    fn query(&self, request: &AdvisorRequest<'_>) -> Result<Option<Value>, AdvisorError>;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewVerdict {
    pub is_good: bool,
    #[serde(default)]
    pub feedback: String,
}

impl ReviewVerdict {
    pub fn accept() -> Self {
        ReviewVerdict {
            is_good: true,
            feedback: String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapAnalysis {
    pub missing_actions: Vec<String>,
    pub missing_preconditions: Vec<MissingPrecondition>,
    pub suggested_plan: Vec<String>,
    pub rationale: String,
    pub action_definitions: BTreeMap<String, String>,
    pub fix: DomainFix,
}

/// Hex SHA-256 of the plan's text form; used to key plan-specific fixtures.
pub fn plan_digest(plan: &Plan) -> String {
    Sha256::digest(plan.to_text().as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// The first balanced `{...}` in `text` that parses as JSON.
pub fn extract_json_object(text: &str) -> Option<Value> {
    let bytes = text.as_bytes();
    let mut start = 0;
    while let Some(offset) = text[start..].find('{') {
        let open = start + offset;
        let (mut depth, mut in_string, mut escaped) = (0usize, false, false);
        for (i, &b) in bytes.iter().enumerate().skip(open) {
            if in_string {
                match b {
                    _ if escaped => escaped = false,
                    b'\\' => escaped = true,
                    b'"' => in_string = false,
                    _ => {}
                }
                continue;
            }
            match b {
                b'"' => in_string = true,
                b'{' => depth += 1,
                b'}' => {
                    depth -= 1;
                    if depth == 0 {
                        if let Ok(v) = serde_json::from_str::<Value>(&text[open..=i]) {
                            if v.is_object() {
                                return Some(v);
                            }
                        }
                        break;
                    }
                }
                _ => {}
            }
        }
        start = open + 1;
    }
    None
}

fn request<'a>(
    mode: AdvisorMode,
    signature: &'a ProblemSignature,
    domain: &'a Domain,
    problem: &'a Problem,
) -> AdvisorRequest<'a> {
    AdvisorRequest {
        mode,
        signature,
        domain,
        problem,
        plan: None,
        feedback: None,
        certificate: None,
    }
}

/// Asks whether `plan` is commonsense-acceptable. No answer means accept.
pub fn review_commonsense(
    backend: &dyn AdvisorBackend,
    signature: &ProblemSignature,
    domain: &Domain,
    problem: &Problem,
    plan: &Plan,
) -> Result<ReviewVerdict, AdvisorError> {
    let req = AdvisorRequest {
        plan: Some(plan),
        ..request(AdvisorMode::Review, signature, domain, problem)
    };
    let Some(reply) = backend.query(&req)? else {
        return Ok(ReviewVerdict::accept());
    };
    let verdict: ReviewVerdict =
        serde_json::from_value(reply).map_err(|e| AdvisorError::Malformed(e.to_string()))?;
    if verdict.is_good {
        Ok(ReviewVerdict::accept())
    } else if verdict.feedback.trim().is_empty() {
        Err(AdvisorError::Malformed("rejection without feedback".into()))
    } else {
        Ok(verdict)
    }
}

fn plan_lines(reply: &Value) -> Option<Vec<String>> {
    let list = match reply {
        Value::Array(_) => reply,
        Value::Object(o) => o.get("plan")?,
        _ => return None,
    };
    list.as_array()?
        .iter()
        .map(|v| v.as_str().map(str::to_string))
        .collect()
}

fn invalid(lines: Vec<String>, verdict: impl fmt::Display) -> AdvisorError {
    AdvisorError::FixedPlanInvalid {
        plan: lines,
        verdict: verdict.to_string(),
    }
}

/// Asks for a corrected plan. The reply is returned only if it validates
/// against `domain` and `problem`.
pub fn generate_fixed_plan(
    backend: &dyn AdvisorBackend,
    signature: &ProblemSignature,
    domain: &Domain,
    problem: &Problem,
    plan: &Plan,
    feedback: &str,
) -> Result<Plan, AdvisorError> {
    if feedback.trim().is_empty() {
        return Err(AdvisorError::EmptyFeedback);
    }
    let req = AdvisorRequest {
        plan: Some(plan),
        feedback: Some(feedback),
        ..request(AdvisorMode::Fix, signature, domain, problem)
    };
    let reply = backend
        .query(&req)?
        .ok_or_else(|| AdvisorError::Unavailable("no corrected plan returned".into()))?;
    let lines = plan_lines(&reply)
        .ok_or_else(|| AdvisorError::Malformed("expected a list of plan steps".into()))?;
    let fixed = match Plan::from_strings(&lines) {
        Ok(p) => p,
        Err(e) => return Err(invalid(lines, e)),
    };
    let verdict: Verdict = validate_plan(domain, problem, &fixed);
    if !verdict.is_valid() {
        return Err(invalid(lines, verdict));
    }
    Ok(fixed)
}

/// Asks why the problem is unsolvable. `None` is the "truly unsolvable"
/// verdict: no reply, or a reply naming neither missing actions nor missing
/// preconditions.
pub fn gap_analysis_for_domain(
    backend: &dyn AdvisorBackend,
    signature: &ProblemSignature,
    domain: &Domain,
    problem: &Problem,
    certificate: &UnsolvabilityCertificate,
) -> Result<Option<GapAnalysis>, AdvisorError> {
    let req = AdvisorRequest {
        certificate: Some(certificate),
        ..request(AdvisorMode::Gap, signature, domain, problem)
    };
    let Some(reply) = backend.query(&req)? else {
        return Ok(None);
    };
    if reply.is_null() {
        return Ok(None);
    }
    let object = reply
        .as_object()
        .ok_or_else(|| AdvisorError::Malformed("gap analysis must be an object".into()))?;
    let names = |key: &str| -> Vec<String> {
        object
            .get(key)
            .and_then(Value::as_array)
            .map(|a| a.iter().filter_map(|v| v.as_str().map(str::to_string)).collect())
            .unwrap_or_default()
    };
    let missing_actions = names("missing_actions");
    let fix = fix_from_value(&reply)?;
    if fix.missing_actions.is_empty() && fix.missing_preconditions.is_empty() {
        return Ok(None);
    }
    let action_definitions = object
        .get("action_definitions")
        .and_then(|v| serde_json::from_value(v.clone()).ok())
        .unwrap_or_default();
    Ok(Some(GapAnalysis {
        missing_actions,
        missing_preconditions: fix.missing_preconditions.clone(),
        suggested_plan: names("suggested_plan"),
        rationale: object
            .get("rationale")
            .and_then(Value::as_str)
            .unwrap_or_default()
            .to_string(),
        action_definitions,
        fix,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extracts_first_balanced_object() {
        let text = r#"Sure! Here is the fix: {"a": {"b": "}"}, "c": [1]} and {"d": 2}"#;
        assert_eq!(
            extract_json_object(text),
            Some(serde_json::json!({"a": {"b": "}"}, "c": [1]}))
        );
        assert_eq!(extract_json_object("{ not json } {\"x\": 1}"), Some(serde_json::json!({"x": 1})));
        assert_eq!(extract_json_object("no braces"), None);
        assert_eq!(extract_json_object("{\"open\": "), None);
    }

    #[test]
    fn plan_lines_accepts_list_or_object() {
        assert_eq!(plan_lines(&serde_json::json!(["a()", "b(x)"])).unwrap().len(), 2);
        assert_eq!(plan_lines(&serde_json::json!({"plan": ["a()"]})).unwrap().len(), 1);
        assert!(plan_lines(&serde_json::json!({"plan": [1]})).is_none());
        assert!(plan_lines(&serde_json::json!("a()")).is_none());
    }

    #[test]
    fn modes_parse() {
        for m in [AdvisorMode::Review, AdvisorMode::Fix, AdvisorMode::Gap] {
            assert_eq!(m.name().parse::<AdvisorMode>(), Ok(m));
        }
    }
}
