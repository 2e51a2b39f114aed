use std::time::Duration;

use planner_core::parser::{print_domain, print_problem};
use serde_json::{json, Value};

use super::{extract_json_object, AdvisorBackend, AdvisorError, AdvisorMode, AdvisorRequest};

pub const ADVISOR_URL_ENV: &str = "PLAN_ADVISOR_URL";
pub const ADVISOR_TOKEN_ENV: &str = "PLAN_ADVISOR_TOKEN";

const REVIEW_PROMPT: &str = include_str!("../../prompts/review.txt");
const FIX_PROMPT: &str = include_str!("../../prompts/fix.txt");
const GAP_PROMPT: &str = include_str!("../../prompts/gap.txt");

pub fn system_prompt(mode: AdvisorMode) -> &'static str {
    match mode {
        AdvisorMode::Review => REVIEW_PROMPT,
        AdvisorMode::Fix => FIX_PROMPT,
        AdvisorMode::Gap => GAP_PROMPT,
    }
}

/// JSON-over-HTTP backend. Each query is one POST; transport failures,
/// timeouts, 429 and 5xx replies are retried with exponential backoff.
#[derive(Debug, Clone)]
pub struct HttpAdvisor {
    pub endpoint: String,
    pub token: Option<String>,
    pub timeout: Duration,
    pub max_retries: u32,
    pub initial_backoff: Duration,
}

impl HttpAdvisor {
    pub fn new(endpoint: impl Into<String>) -> Self {
        HttpAdvisor {
            endpoint: endpoint.into(),
            token: None,
            timeout: Duration::from_secs(60),
            max_retries: 3,
            initial_backoff: Duration::from_millis(500),
        }
    }

    /// Reads the endpoint and optional bearer token from the environment.
    pub fn from_env() -> Result<Self, AdvisorError> {
        let endpoint = std::env::var(ADVISOR_URL_ENV)
            .map_err(|_| AdvisorError::Unavailable(format!("{ADVISOR_URL_ENV} is not set")))?;
        let mut advisor = HttpAdvisor::new(endpoint);
        advisor.token = std::env::var(ADVISOR_TOKEN_ENV).ok().filter(|t| !t.is_empty());
        Ok(advisor)
    }

    pub fn request_body(request: &AdvisorRequest<'_>) -> Value {
        let domain_text = print_domain(request.domain);
        let problem_text = print_problem(request.problem);
        let mut user = format!("Domain:\n{domain_text}\n\nProblem:\n{problem_text}\n");
        if !request.problem.soft_goals.is_empty() {
            user.push_str(&format!(
                "\nSoft goals:\n{}\n",
                planner_core::parser::print_soft_goals(&request.problem.soft_goals)
            ));
        }
        let mut body = json!({
            "mode": request.mode.name(),
            "domain_text": domain_text,
            "problem_text": problem_text,
        });
        if let Some(plan) = request.plan {
            body["plan"] = json!(plan.to_strings());
            user.push_str(&format!("\nPlan:\n{}", plan.to_text()));
        }
        if let Some(feedback) = request.feedback {
            body["feedback"] = json!(feedback);
            user.push_str(&format!("\nFeedback:\n{feedback}\n"));
        }
        if let Some(cert) = request.certificate {
            let value = serde_json::to_value(cert).expect("serializable");
            user.push_str(&format!(
                "\nPlanner diagnosis:\n{}\n",
                serde_json::to_string_pretty(&value).expect("serializable")
            ));
            body["certificate"] = value;
        }
        body["messages"] = json!([
            {"role": "system", "content": system_prompt(request.mode)},
            {"role": "user", "content": user},
        ]);
        body
    }

    fn post(&self, agent: &ureq::Agent, body: &str) -> Result<(u16, String), String> {
        let mut req = agent
            .post(&self.endpoint)
            .header("Content-Type", "application/json");
        if let Some(token) = &self.token {
            req = req.header("Authorization", &format!("Bearer {token}"));
        }
        let mut response = req.send(body).map_err(|e| e.to_string())?;
        let status = response.status().as_u16();
        let text = response
            .body_mut()
            .read_to_string()
            .map_err(|e| e.to_string())?;
        Ok((status, text))
    }
}

/// Interprets a response body: a bare reply object, a chat-completion
/// envelope whose first message holds the reply, or prose around one.
pub fn parse_reply(text: &str) -> Result<Option<Value>, AdvisorError> {
    let value = match serde_json::from_str::<Value>(text) {
        Ok(v) => v,
        Err(_) => {
            return extract_json_object(text)
                .map(Some)
                .ok_or_else(|| AdvisorError::Malformed("no JSON object in reply".into()))
        }
    };
    if let Some(content) = value
        .pointer("/choices/0/message/content")
        .and_then(Value::as_str)
    {
        return parse_reply(content);
    }
    Ok(match value {
        Value::Null => None,
        Value::String(s) => return parse_reply(&s),
        other => Some(other),
    })
}

impl AdvisorBackend for HttpAdvisor {
    fn id(&self) -> String {
        format!("http:{}", self.endpoint)
    }

    fn query(&self, request: &AdvisorRequest<'_>) -> Result<Option<Value>, AdvisorError> {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(self.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        let body = Self::request_body(request).to_string();
        let mut backoff = self.initial_backoff;
        let mut last_error = String::new();
        for attempt in 0..=self.max_retries {
            if attempt > 0 {
                log::warn!(
                    "advisor {} attempt {attempt} failed ({last_error}); retrying in {backoff:?}",
                    request.mode
                );
                std::thread::sleep(backoff);
                backoff = backoff.saturating_mul(2);
            }
            match self.post(&agent, &body) {
                Ok((status, text)) if (200..300).contains(&status) => return parse_reply(&text),
                Ok((status, _)) if status == 429 || status >= 500 => {
                    last_error = format!("HTTP {status}");
                }
                Ok((status, text)) => {
                    return Err(AdvisorError::Unavailable(format!(
                        "HTTP {status}: {}",
                        text.chars().take(200).collect::<String>()
                    )))
                }
                Err(e) => last_error = e,
            }
        }
        Err(AdvisorError::Unavailable(format!(
            "{} attempts failed, last: {last_error}",
            self.max_retries + 1
        )))
    }
}
