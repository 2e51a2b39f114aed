use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::model::{Atom, AtomSyntaxError};

/// One plan step: an action name applied to object arguments.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlanStep {
    pub action: String,
    pub args: Vec<String>,
}

impl PlanStep {
    pub fn new<I, S>(action: impl Into<String>, args: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        PlanStep {
            action: action.into(),
            args: args.into_iter().map(Into::into).collect(),
        }
    }
}

impl fmt::Display for PlanStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.action, self.args.join(","))
    }
}

impl FromStr for PlanStep {
    type Err = AtomSyntaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let atom = Atom::parse_compact(s)?;
        Ok(PlanStep {
            action: atom.predicate,
            args: atom.args,
        })
    }
}

impl Serialize for PlanStep {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PlanStep {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {source}")]
pub struct PlanSyntaxError {
    pub line: usize,
    #[source]
    pub source: AtomSyntaxError,
}

/// An ordered action sequence.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Plan {
    pub steps: Vec<PlanStep>,
}

impl Plan {
    pub fn new(steps: Vec<PlanStep>) -> Self {
        Plan { steps }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Parses one action per line; blank lines and `;` comments are skipped.
    pub fn parse(text: &str) -> Result<Plan, PlanSyntaxError> {
        let mut steps = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split(';').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            steps.push(line.parse().map_err(|source| PlanSyntaxError {
                line: i + 1,
                source,
            })?);
        }
        Ok(Plan { steps })
    }

    pub fn from_strings<S: AsRef<str>>(lines: &[S]) -> Result<Plan, PlanSyntaxError> {
        lines
            .iter()
            .enumerate()
            .map(|(i, l)| {
                l.as_ref().parse().map_err(|source| PlanSyntaxError {
                    line: i + 1,
                    source,
                })
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Plan::new)
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.steps.iter().map(ToString::to_string).collect()
    }

    pub fn to_text(&self) -> String {
        self.steps.iter().map(|s| format!("{s}\n")).collect()
    }

    pub fn contains_action(&self, name: &str) -> bool {
        self.steps.iter().any(|s| s.action == name)
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.steps.iter().position(|s| s.action == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_skips_comments_and_blank_lines() {
        let plan = Plan::parse("; golden\nmove(robot, table, fridge)\n\nopen-fridge(robot) ; door\n").unwrap();
        assert_eq!(plan.len(), 2);
        assert_eq!(plan.steps[0], PlanStep::new("move", ["robot", "table", "fridge"]));
        assert_eq!(plan.to_text(), "move(robot,table,fridge)\nopen-fridge(robot)\n");
    }

    #[test]
    fn parse_reports_line() {
        let err = Plan::parse("a(b)\nc(d\n").unwrap_err();
        assert_eq!(err.line, 2);
    }

    #[test]
    fn serializes_as_string_list() {
        let plan = Plan::parse("a(b)\nc()").unwrap();
        let json = serde_json::to_string(&plan).unwrap();
        assert_eq!(json, r#"["a(b)","c()"]"#);
        assert_eq!(serde_json::from_str::<Plan>(&json).unwrap(), plan);
    }
}
