//! The `[argument | relation], ...` output grammar.
//!
//! Arguments are either entity mentions from the question or Wh-term
//! placeholders. Inside brackets the characters `\ [ ] | ,` are escaped
//! with a backslash. The reader also accepts ` - ` as the separator when a
//! chunk has no `|`, and pairs separated by whitespace without a comma.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{SequenceParseError, SerializeError};
use crate::integration::LinkedEntity;

pub const DEFAULT_WH_TERMS: [&str; 8] = ["who", "what", "where", "when", "which", "whom", "whose", "how"];
const ASK_OPENERS: [&str; 11] = ["is", "was", "are", "were", "do", "does", "did", "has", "have", "had", "can"];

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Argument {
    Entity(String),
    Placeholder(String),
}

impl Argument {
    pub fn text(&self) -> &str {
        match self {
            Argument::Entity(m) | Argument::Placeholder(m) => m,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArgRelPair {
    pub argument: Argument,
    pub relation: String,
}

impl ArgRelPair {
    pub fn entity(mention: impl Into<String>, relation: impl Into<String>) -> Self {
        Self { argument: Argument::Entity(mention.into()), relation: relation.into() }
    }

    pub fn placeholder(wh_term: impl Into<String>, relation: impl Into<String>) -> Self {
        Self { argument: Argument::Placeholder(wh_term.into()), relation: relation.into() }
    }
}

/// Case-insensitive set of question words used as placeholders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WhLexicon(BTreeSet<String>);

impl WhLexicon {
    pub fn new<I, S>(terms: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self(terms.into_iter().map(|t| t.as_ref().trim().to_lowercase()).collect())
    }

    pub fn contains(&self, term: &str) -> bool {
        self.0.contains(&term.trim().to_lowercase())
    }

    /// First question token that is a Wh term.
    pub fn find_in(&self, question: &str) -> Option<String> {
        question
            .split(|c: char| !c.is_alphanumeric())
            .find(|tok| !tok.is_empty() && self.contains(tok))
            .map(str::to_string)
    }
}

impl Default for WhLexicon {
    fn default() -> Self {
        Self::new(DEFAULT_WH_TERMS)
    }
}

pub fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        if matches!(c, '\\' | '[' | ']' | '|' | ',') {
            out.push('\\');
        }
        out.push(c);
    }
    out
}

fn unescape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            if let Some(next) = chars.next() {
                out.push(next);
                continue;
            }
        }
        out.push(c);
    }
    out
}

pub fn serialize_target(pairs: &[ArgRelPair]) -> Result<String, SerializeError> {
    if pairs.is_empty() {
        return Err(SerializeError::Empty);
    }
    let mut parts = Vec::with_capacity(pairs.len());
    for pair in pairs {
        if pair.relation.trim().is_empty() {
            return Err(SerializeError::EmptyRelation);
        }
        parts.push(format!("[{} | {}]", escape(pair.argument.text()), escape(&pair.relation)));
    }
    Ok(parts.join(", "))
}

/// Splits a generated sequence into pairs, classifying each argument
/// against `wh`.
pub fn parse_pairs(text: &str, wh: &WhLexicon) -> Result<Vec<ArgRelPair>, SequenceParseError> {
    let err = |reason: &str, chunk: &str| SequenceParseError { reason: reason.to_string(), chunk: chunk.to_string() };
    let mut rest = text.trim_start();
    if rest.trim().is_empty() {
        return Err(err("empty sequence", text));
    }
    let mut pairs = Vec::new();
    while !rest.is_empty() {
        let Some(body) = rest.strip_prefix('[') else {
            return Err(err("expected '['", rest));
        };
        let (chunk, after) = bracket_body(body).map_err(|reason| err(reason, rest))?;
        pairs.push(parse_chunk(chunk, wh).map_err(|reason| err(reason, chunk))?);
        rest = after.trim_start();
        if let Some(after_comma) = rest.strip_prefix(',') {
            rest = after_comma.trim_start();
            if rest.is_empty() {
                return Err(err("trailing ','", text));
            }
        }
    }
    Ok(pairs)
}

/// Returns the raw text up to the first unescaped `]` and the remainder.
fn bracket_body(body: &str) -> Result<(&str, &str), &'static str> {
    let mut escaped = false;
    for (i, c) in body.char_indices() {
        if escaped {
            escaped = false;
            continue;
        }
        match c {
            '\\' => escaped = true,
            '[' => return Err("unbalanced '['"),
            ']' => return Ok((&body[..i], &body[i + 1..])),
            _ => {}
        }
    }
    Err("unclosed '['")
}

fn parse_chunk(chunk: &str, wh: &WhLexicon) -> Result<ArgRelPair, &'static str> {
    let mut pipes = Vec::new();
    let mut escaped = false;
    for (i, c) in chunk.char_indices() {
        if escaped {
            escaped = false;
        } else if c == '\\' {
            escaped = true;
        } else if c == '|' {
            pipes.push(i);
        }
    }
    let (arg, rel) = match pipes.as_slice() {
        [one] => (&chunk[..*one], &chunk[*one + 1..]),
        [] => match chunk.rfind(" - ") {
            Some(i) => (&chunk[..i], &chunk[i + 3..]),
            None => return Err("missing '|'"),
        },
        _ => return Err("more than one '|'"),
    };
    let arg = unescape(arg.trim());
    let relation = unescape(rel.trim());
    if arg.is_empty() {
        return Err("empty argument");
    }
    if relation.is_empty() {
        return Err("empty relation");
    }
    let argument = if wh.contains(&arg) { Argument::Placeholder(arg) } else { Argument::Entity(arg) };
    Ok(ArgRelPair { argument, relation })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MentionMatch {
    Exact,
    CaseInsensitive,
    /// At least half of the argument's tokens occur in the mention.
    Fuzzy,
}

/// What an argument maps to in the question.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ArgBinding {
    /// Index into the question's linked entities.
    Entity { index: usize, matched: MentionMatch },
    Placeholder,
    Unresolved,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedPair {
    pub pair: ArgRelPair,
    pub binding: ArgBinding,
}

pub fn parse_output(
    text: &str,
    entities: &[LinkedEntity],
    wh: &WhLexicon,
) -> Result<Vec<ResolvedPair>, SequenceParseError> {
    Ok(parse_pairs(text, wh)?
        .into_iter()
        .map(|pair| {
            let binding = match &pair.argument {
                Argument::Placeholder(_) => ArgBinding::Placeholder,
                Argument::Entity(mention) => resolve_mention(mention, entities),
            };
            ResolvedPair { pair, binding }
        })
        .collect())
}

fn tokens(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

pub fn resolve_mention(mention: &str, entities: &[LinkedEntity]) -> ArgBinding {
    if let Some(index) = entities.iter().position(|e| e.mention == mention) {
        return ArgBinding::Entity { index, matched: MentionMatch::Exact };
    }
    let folded = mention.to_lowercase();
    if let Some(index) = entities.iter().position(|e| e.mention.to_lowercase() == folded) {
        return ArgBinding::Entity { index, matched: MentionMatch::CaseInsensitive };
    }
    let arg_tokens = tokens(mention);
    if arg_tokens.is_empty() {
        return ArgBinding::Unresolved;
    }
    let mut best: Option<(usize, usize)> = None;
    for (index, entity) in entities.iter().enumerate() {
        let mention_tokens: BTreeSet<String> = tokens(&entity.mention).into_iter().collect();
        let overlap = arg_tokens.iter().filter(|t| mention_tokens.contains(*t)).count();
        if overlap > best.map_or(0, |(_, o)| o) {
            best = Some((index, overlap));
        }
    }
    match best {
        Some((index, overlap)) if 2 * overlap >= arg_tokens.len() => {
            ArgBinding::Entity { index, matched: MentionMatch::Fuzzy }
        }
        _ => ArgBinding::Unresolved,
    }
}

/// Yes/no questions open with an auxiliary verb.
pub fn detect_ask(question: &str) -> bool {
    question
        .split_whitespace()
        .next()
        .map(|tok| tok.chars().filter(|c| c.is_alphanumeric()).flat_map(char::to_lowercase).collect::<String>())
        .is_some_and(|tok| ASK_OPENERS.contains(&tok.as_str()))
}
