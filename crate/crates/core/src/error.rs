use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TermError {
    #[error("empty IRI")]
    EmptyIri,
    #[error("IRI is not absolute: {0:?}")]
    NotAbsolute(String),
    #[error("IRI {iri:?} contains forbidden character {ch:?}")]
    InvalidIriChar { iri: String, ch: char },
    #[error("variable without a name")]
    EmptyVariable,
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("N-Triples line {line}: {message}")]
    NTriples { line: usize, message: String },
    #[error("ontology line {line}: {message}")]
    Ontology { line: usize, message: String },
    #[error("class hierarchy contains a cycle: {}", .0.join(" -> "))]
    HierarchyCycle(Vec<String>),
    #[error("I/O error while loading: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown profile {0:?} (expected dbpedia or wikidata)")]
    UnknownProfile(String),
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("word vector file line {line}: {message}")]
    Vectors { line: usize, message: String },
}

/// Failure to parse a generated `[arg | rel], ...` sequence. Carries the
/// offending chunk.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{reason} in {chunk:?}")]
pub struct SequenceParseError {
    pub reason: String,
    pub chunk: String,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SerializeError {
    #[error("cannot serialize an empty pair list")]
    Empty,
    #[error("empty relation label")]
    EmptyRelation,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IntegrationError {
    #[error("input needs {needed} tokens but the budget is {budget}")]
    InputTooLong { needed: usize, budget: usize },
    #[error("entity offsets [{start}, {end}) do not match the question")]
    BadOffsets { start: usize, end: usize },
}

#[derive(Debug, Error)]
pub enum GeneratorError {
    #[error("cannot read beam fixtures: {0}")]
    Fixture(String),
    #[error("remote generator request failed: {0}")]
    Transport(String),
    #[error("remote generator returned an invalid reply: {0}")]
    Reply(String),
    #[error("beam width must be at least 1")]
    ZeroWidth,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("cannot aggregate an empty record list")]
    Empty,
}
