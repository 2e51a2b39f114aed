use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// `true` for `?x`-style schema variables.
pub fn is_variable(term: &str) -> bool {
    term.starts_with('?')
}

/// A predicate applied to terms (objects, constants, or `?variables`).
///
/// Ordering is by predicate name, then arguments, which is the order of the
/// grounded atom table.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    pub atom: Atom,
    pub positive: bool,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("malformed atom `{text}`: {reason}")]
pub struct AtomSyntaxError {
    pub text: String,
    pub reason: &'static str,
}

fn valid_ident(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_alphanumeric() || matches!(c, '-' | '_' | '?' | '.'))
}

impl Atom {
    pub fn new<I, S>(predicate: impl Into<String>, args: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Atom {
            predicate: predicate.into(),
            args: args.into_iter().map(Into::into).collect(),
        }
    }

    pub fn is_ground(&self) -> bool {
        !self.args.iter().any(|a| is_variable(a))
    }

    /// Parses the compact `name(arg,...)` form. Whitespace around names and
    /// commas is tolerated, identifiers are lower-cased, and a bare `name` is
    /// a zero-argument atom. The s-expression form `(name arg ...)` is also
    /// accepted so plan files written either way load.
    pub fn parse_compact(text: &str) -> Result<Atom, AtomSyntaxError> {
        let err = |reason| AtomSyntaxError {
            text: text.to_string(),
            reason,
        };
        let trimmed = text.trim();
        if trimmed.is_empty() {
            return Err(err("empty"));
        }
        if let Some(inner) = trimmed.strip_prefix('(') {
            let inner = inner.strip_suffix(')').ok_or_else(|| err("unbalanced parenthesis"))?;
            let mut parts = inner.split_whitespace().map(str::to_lowercase);
            let predicate = parts.next().ok_or_else(|| err("missing name"))?;
            let args: Vec<String> = parts.collect();
            if !valid_ident(&predicate) || !args.iter().all(|a| valid_ident(a)) {
                return Err(err("invalid identifier"));
            }
            return Ok(Atom { predicate, args });
        }
        let (name, args) = match trimmed.find('(') {
            None => (trimmed, Vec::new()),
            Some(open) => {
                let rest = &trimmed[open + 1..];
                let inner = rest.strip_suffix(')').ok_or_else(|| err("missing `)`"))?;
                if inner.contains(['(', ')']) {
                    return Err(err("nested parenthesis"));
                }
                let args = if inner.trim().is_empty() {
                    Vec::new()
                } else {
                    inner
                        .split(',')
                        .map(|a| a.trim().to_lowercase())
                        .collect::<Vec<_>>()
                };
                (&trimmed[..open], args)
            }
        };
        let predicate = name.trim().to_lowercase();
        if !valid_ident(&predicate) {
            return Err(err("invalid name"));
        }
        if args.iter().any(|a| !valid_ident(a)) {
            return Err(err("invalid argument"));
        }
        Ok(Atom { predicate, args })
    }

    /// Replaces variables using `binding`; unknown terms are kept.
    pub fn substitute(&self, binding: &dyn Fn(&str) -> Option<String>) -> Atom {
        Atom {
            predicate: self.predicate.clone(),
            args: self
                .args
                .iter()
                .map(|a| binding(a).unwrap_or_else(|| a.clone()))
                .collect(),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.predicate, self.args.join(","))
    }
}

impl FromStr for Atom {
    type Err = AtomSyntaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Atom::parse_compact(s)
    }
}

impl Serialize for Atom {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Atom {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Atom::parse_compact(&text).map_err(serde::de::Error::custom)
    }
}

impl Literal {
    pub fn pos(atom: Atom) -> Self {
        Literal {
            atom,
            positive: true,
        }
    }

    pub fn neg(atom: Atom) -> Self {
        Literal {
            atom,
            positive: false,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "{}", self.atom)
        } else {
            write!(f, "not({})", self.atom)
        }
    }
}
