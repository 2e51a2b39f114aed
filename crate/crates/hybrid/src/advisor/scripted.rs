use std::collections::BTreeMap;
use std::path::Path;

use serde_json::Value;

use super::{plan_digest, AdvisorBackend, AdvisorError, AdvisorRequest};

/// Deterministic backend answering from a fixture document that maps
/// `"<mode>:<signature>"` (or, more specifically,
/// `"<mode>:<signature>:<plan-digest>"`) to a reply object.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScriptedAdvisor {
    name: String,
    fixtures: BTreeMap<String, Value>,
}

impl ScriptedAdvisor {
    pub fn empty() -> Self {
        ScriptedAdvisor {
            name: "scripted".into(),
            fixtures: BTreeMap::new(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, AdvisorError> {
        let fixtures: BTreeMap<String, Value> =
            serde_json::from_str(text).map_err(|e| AdvisorError::Malformed(e.to_string()))?;
        Ok(ScriptedAdvisor {
            name: "scripted".into(),
            fixtures,
        })
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, AdvisorError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| AdvisorError::Unavailable(format!("{}: {e}", path.display())))?;
        let mut advisor = Self::from_json(&text)?;
        advisor.name = format!("scripted:{}", path.display());
        Ok(advisor)
    }

    /// Combines fixture sets; on duplicate keys `other` wins.
    pub fn merged(mut self, other: ScriptedAdvisor) -> Self {
        self.fixtures.extend(other.fixtures);
        self
    }

    pub fn insert(&mut self, key: impl Into<String>, reply: Value) {
        self.fixtures.insert(key.into(), reply);
    }

    pub fn fixtures(&self) -> &BTreeMap<String, Value> {
        &self.fixtures
    }

    fn keys(request: &AdvisorRequest<'_>) -> Vec<String> {
        let base = format!("{}:{}", request.mode, request.signature);
        let mut keys = Vec::with_capacity(2);
        if let Some(plan) = request.plan {
            keys.push(format!("{base}:{}", plan_digest(plan)));
        }
        keys.push(base);
        keys
    }
}

impl AdvisorBackend for ScriptedAdvisor {
    fn id(&self) -> String {
        self.name.clone()
    }

    fn query(&self, request: &AdvisorRequest<'_>) -> Result<Option<Value>, AdvisorError> {
        Ok(Self::keys(request)
            .iter()
            .find_map(|k| self.fixtures.get(k))
            .cloned())
    }
}
