//! RDF terms, triples and triple patterns.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::TermError;

/// An absolute IRI.
///
/// Compact forms such as `dbo:state` are syntactically absolute (the prefix
/// reads as a scheme) and are accepted as-is; [`PrefixTable::expand`] turns
/// them into full IRIs when the prefix is known.
///
/// [`PrefixTable::expand`]: crate::kb::PrefixTable::expand
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Iri(String);

impl Iri {
    pub fn new(value: impl Into<String>) -> Result<Self, TermError> {
        let value = value.into();
        validate_iri(&value)?;
        Ok(Self(value))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }

    /// Text after the last `#`, `/` or `:`.
    pub fn local_name(&self) -> &str {
        let idx = self.0.rfind(['#', '/', ':']).map_or(0, |i| i + 1);
        &self.0[idx..]
    }
}

fn validate_iri(value: &str) -> Result<(), TermError> {
    if value.is_empty() {
        return Err(TermError::EmptyIri);
    }
    let Some(colon) = value.find(':') else {
        return Err(TermError::NotAbsolute(value.to_string()));
    };
    let scheme = &value[..colon];
    let mut chars = scheme.chars();
    let scheme_ok = chars.next().is_some_and(|c| c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.' | '_'));
    if !scheme_ok {
        return Err(TermError::NotAbsolute(value.to_string()));
    }
    if let Some(bad) = value
        .chars()
        .find(|c| c.is_whitespace() || c.is_control() || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\'))
    {
        return Err(TermError::InvalidIriChar { iri: value.to_string(), ch: bad });
    }
    Ok(())
}

impl TryFrom<String> for Iri {
    type Error = TermError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<Iri> for String {
    fn from(iri: Iri) -> Self {
        iri.0
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A node in the store: IRI, blank node (e.g. a Wikidata statement), or
/// literal. Literals compare by lexical form only.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Iri(Iri),
    Blank(String),
    Literal(String),
}

impl Term {
    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Term::Iri(iri) => Some(iri),
            _ => None,
        }
    }
}

impl From<Iri> for Term {
    fn from(iri: Iri) -> Self {
        Term::Iri(iri)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(iri) => write!(f, "<{iri}>"),
            Term::Blank(label) => write!(f, "_:{label}"),
            Term::Literal(lex) => write!(f, "{lex:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub subject: Term,
    pub predicate: Iri,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: impl Into<Term>, predicate: Iri, object: impl Into<Term>) -> Self {
        Self { subject: subject.into(), predicate, object: object.into() }
    }
}

/// A query variable, written `?name`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Variable(String);

impl Variable {
    pub fn new(name: impl Into<String>) -> Self {
        let name = name.into();
        Self(name.strip_prefix('?').map(str::to_string).unwrap_or(name))
    }

    /// The shared hub variable joining all pairs of a candidate graph.
    pub fn x() -> Self {
        Self("x".into())
    }

    /// The placeholder (answer / unknown) variable.
    pub fn y() -> Self {
        Self("y".into())
    }

    /// Statement-node variable local to the pair at `index`.
    pub fn statement(index: usize) -> Self {
        Self(format!("s{index}"))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PatternTerm {
    Const(Term),
    Var(Variable),
}

impl PatternTerm {
    pub fn iri(iri: &Iri) -> Self {
        PatternTerm::Const(Term::Iri(iri.clone()))
    }

    /// Parses `?v` as a variable, `_:b` as a blank node, `"lit"` as a
    /// literal and anything else as an IRI (angle brackets optional).
    pub fn parse(text: &str) -> Result<Self, TermError> {
        let text = text.trim();
        if let Some(name) = text.strip_prefix('?') {
            if name.is_empty() {
                return Err(TermError::EmptyVariable);
            }
            return Ok(PatternTerm::Var(Variable::new(name)));
        }
        if let Some(label) = text.strip_prefix("_:") {
            return Ok(PatternTerm::Const(Term::Blank(label.to_string())));
        }
        if text.len() >= 2 && text.starts_with('"') && text.ends_with('"') {
            return Ok(PatternTerm::Const(Term::Literal(text[1..text.len() - 1].to_string())));
        }
        let bare = text.strip_prefix('<').and_then(|t| t.strip_suffix('>')).unwrap_or(text);
        Ok(PatternTerm::iri(&Iri::new(bare)?))
    }

    pub fn as_var(&self) -> Option<&Variable> {
        match self {
            PatternTerm::Var(v) => Some(v),
            PatternTerm::Const(_) => None,
        }
    }
}

impl From<Variable> for PatternTerm {
    fn from(v: Variable) -> Self {
        PatternTerm::Var(v)
    }
}

impl From<Term> for PatternTerm {
    fn from(t: Term) -> Self {
        PatternTerm::Const(t)
    }
}

impl fmt::Display for PatternTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternTerm::Const(t) => t.fmt(f),
            PatternTerm::Var(v) => v.fmt(f),
        }
    }
}

/// A triple with optional variables in subject and object position. The
/// predicate is always bound.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TriplePattern {
    pub subject: PatternTerm,
    pub predicate: Iri,
    pub object: PatternTerm,
}

impl TriplePattern {
    pub fn new(subject: impl Into<PatternTerm>, predicate: Iri, object: impl Into<PatternTerm>) -> Self {
        Self { subject: subject.into(), predicate, object: object.into() }
    }

    pub fn variables(&self) -> impl Iterator<Item = &Variable> {
        self.subject.as_var().into_iter().chain(self.object.as_var())
    }
}

impl fmt::Display for TriplePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} <{}> {}", self.subject, self.predicate, self.object)
    }
}
