//! Knowledge integration: builds the generator's source text from a
//! question and its linked entities.
//!
//! Each entity contributes one structure `[mention | type | rel1, rel2, ...]`
//! appended after the question. Candidate relations are ranked by
//! similarity to the question and trimmed round-robin until the rendered
//! text fits the token budget.

use std::collections::{BTreeSet, HashMap};
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, IntegrationError};
use crate::grammar::escape;
use crate::kb::{Iri, KbStore};

pub const DEFAULT_BUDGET: usize = 512;

/// A question span resolved to a KB entity. Offsets count characters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkedEntity {
    pub mention: String,
    pub start: usize,
    pub end: usize,
    pub iri: Iri,
}

impl LinkedEntity {
    pub fn new(question: &str, start: usize, end: usize, iri: Iri) -> Result<Self, IntegrationError> {
        let entity = Self {
            mention: question.chars().skip(start).take(end.saturating_sub(start)).collect(),
            start,
            end,
            iri,
        };
        entity.check(question)?;
        Ok(entity)
    }

    /// Offsets must be in range and select exactly `mention`.
    pub fn check(&self, question: &str) -> Result<(), IntegrationError> {
        let len = question.chars().count();
        let span: String = question.chars().skip(self.start).take(self.end.saturating_sub(self.start)).collect();
        if self.start >= self.end || self.end > len || span != self.mention {
            return Err(IntegrationError::BadOffsets { start: self.start, end: self.end });
        }
        Ok(())
    }
}

/// Splits text into lowercase word tokens, breaking camel case
/// (`placeOfBurial` gives `place`, `of`, `burial`).
pub fn word_tokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for part in text.split(|c: char| !c.is_alphanumeric()).filter(|p| !p.is_empty()) {
        let chars: Vec<char> = part.chars().collect();
        let mut current = String::new();
        for (i, &c) in chars.iter().enumerate() {
            let prev = i.checked_sub(1).map(|j| chars[j]);
            let next = chars.get(i + 1).copied();
            let boundary = c.is_uppercase()
                && prev.is_some_and(|p| p.is_lowercase() || p.is_numeric()
                    || (p.is_uppercase() && next.is_some_and(char::is_lowercase)));
            if boundary && !current.is_empty() {
                out.push(std::mem::take(&mut current));
            }
            current.extend(c.to_lowercase());
        }
        if !current.is_empty() {
            out.push(current);
        }
    }
    out
}

/// Scores how well a relation label fits a question; higher is better.
pub trait RelationScorer: Send + Sync {
    fn score(&self, question: &str, label: &str) -> f64;
}

/// Character-trigram cosine: for each label token, the best cosine against
/// any question token, averaged over label tokens. Tokens are padded with
/// `#` before taking trigrams.
#[derive(Debug, Clone, Copy, Default)]
pub struct TrigramScorer;

fn trigrams(token: &str) -> HashMap<[char; 3], f64> {
    let padded: Vec<char> = std::iter::once('#').chain(token.chars()).chain(std::iter::once('#')).collect();
    let mut counts = HashMap::new();
    for w in padded.windows(3) {
        *counts.entry([w[0], w[1], w[2]]).or_insert(0.0) += 1.0;
    }
    counts
}

fn sparse_cosine(a: &HashMap<[char; 3], f64>, b: &HashMap<[char; 3], f64>) -> f64 {
    let dot: f64 = a.iter().filter_map(|(k, v)| b.get(k).map(|w| v * w)).sum();
    let norm = |m: &HashMap<[char; 3], f64>| m.values().map(|v| v * v).sum::<f64>().sqrt();
    let denom = norm(a) * norm(b);
    if denom == 0.0 {
        0.0
    } else {
        dot / denom
    }
}

fn best_match_average<T>(question: &[T], label: &[T], sim: impl Fn(&T, &T) -> f64) -> f64 {
    if question.is_empty() || label.is_empty() {
        return 0.0;
    }
    let total: f64 = label
        .iter()
        .map(|l| question.iter().map(|q| sim(q, l)).fold(0.0, f64::max))
        .sum();
    total / label.len() as f64
}

impl RelationScorer for TrigramScorer {
    fn score(&self, question: &str, label: &str) -> f64 {
        let q: Vec<_> = word_tokens(question).iter().map(|t| trigrams(t)).collect();
        let l: Vec<_> = word_tokens(label).iter().map(|t| trigrams(t)).collect();
        best_match_average(&q, &l, sparse_cosine)
    }
}

/// Same best-match averaging over word vectors loaded from a text file
/// (`token v1 v2 ... vD` per line). Out-of-vocabulary tokens score 0.
#[derive(Debug, Clone, Default)]
pub struct WordVectorScorer {
    vectors: HashMap<String, Vec<f64>>,
}

impl WordVectorScorer {
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self, ConfigError> {
        let mut vectors = HashMap::new();
        let mut dim = None;
        for (idx, line) in reader.lines().enumerate() {
            let err = |message: String| ConfigError::Vectors { line: idx + 1, message };
            let line = line.map_err(|e| err(e.to_string()))?;
            let mut fields = line.split_whitespace();
            let Some(token) = fields.next() else {
                continue;
            };
            let values: Vec<f64> = fields
                .map(|f| f.parse().map_err(|_| err(format!("not a number: {f:?}"))))
                .collect::<Result<_, _>>()?;
            if values.is_empty() {
                return Err(err("token without vector".into()));
            }
            match dim {
                None => dim = Some(values.len()),
                Some(d) if d != values.len() => {
                    return Err(err(format!("expected {d} components, found {}", values.len())));
                }
                Some(_) => {}
            }
            vectors.insert(token.to_lowercase(), values);
        }
        Ok(Self { vectors })
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let file = std::fs::File::open(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        Self::from_reader(std::io::BufReader::new(file))
    }

    fn cosine(a: &[f64], b: &[f64]) -> f64 {
        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        let denom = a.iter().map(|x| x * x).sum::<f64>().sqrt() * b.iter().map(|x| x * x).sum::<f64>().sqrt();
        if denom == 0.0 {
            0.0
        } else {
            dot / denom
        }
    }
}

impl RelationScorer for WordVectorScorer {
    fn score(&self, question: &str, label: &str) -> f64 {
        let lookup = |text: &str| -> Vec<Option<&Vec<f64>>> {
            word_tokens(text).iter().map(|t| self.vectors.get(t)).collect()
        };
        best_match_average(&lookup(question), &lookup(label), |q, l| match (q, l) {
            (Some(q), Some(l)) => Self::cosine(q, l),
            _ => 0.0,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedRelation {
    pub label: String,
    pub score: f64,
}

/// Orders `labels` by descending score; equal scores fall back to label
/// order.
pub fn rank_candidate_relations(question: &str, labels: &[String], scorer: &dyn RelationScorer) -> Vec<RankedRelation> {
    let mut ranked: Vec<RankedRelation> = labels
        .iter()
        .map(|label| RankedRelation { label: label.clone(), score: scorer.score(question, label) })
        .collect();
    ranked.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.label.cmp(&b.label)));
    ranked
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityStructure {
    pub mention: String,
    pub type_label: Option<String>,
    pub relations: Vec<RankedRelation>,
}

impl EntityStructure {
    pub fn render(&self) -> String {
        render_parts(&self.mention, self.type_label.as_deref(), self.relations.iter().map(|r| r.label.as_str()))
    }
}

fn render_parts<'a>(mention: &str, type_label: Option<&str>, relations: impl Iterator<Item = &'a str>) -> String {
    let mut out = format!("[{} |", escape(mention));
    if let Some(t) = type_label {
        out.push(' ');
        out.push_str(&escape(t));
    }
    out.push_str(" |");
    let rels: Vec<String> = relations.map(escape).collect();
    if !rels.is_empty() {
        out.push(' ');
        out.push_str(&rels.join(", "));
    }
    out.push(']');
    out
}

/// Structure for one entity: its most specific type and up to
/// `max_relations` of its relation labels, best first.
pub fn build_entity_structure(
    store: &KbStore,
    question: &str,
    entity: &LinkedEntity,
    max_relations: usize,
    scorer: &dyn RelationScorer,
) -> EntityStructure {
    let labels: BTreeSet<String> = store.relations_of(&entity.iri).iter().map(|r| store.relation_label(r)).collect();
    let labels: Vec<String> = labels.into_iter().collect();
    let mut relations = rank_candidate_relations(question, &labels, scorer);
    relations.truncate(max_relations);
    EntityStructure {
        mention: entity.mention.clone(),
        type_label: store.most_specific_type(&entity.iri).map(|t| store.label_of(&t)),
        relations,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderInput {
    pub question: String,
    pub structures: Vec<EntityStructure>,
    pub rendered: String,
    pub budget: usize,
}

/// Budget unit: whitespace-delimited tokens.
pub fn token_count(text: &str) -> usize {
    text.split_whitespace().count()
}

fn render_input(question: &str, structures: &[EntityStructure]) -> String {
    let mut out = question.to_string();
    for s in structures {
        out.push(' ');
        out.push_str(&s.render());
    }
    out
}

impl EncoderInput {
    /// The bare question, used when KB context is disabled.
    pub fn question_only(question: &str, budget: usize) -> Result<Self, IntegrationError> {
        let needed = token_count(question);
        if needed > budget {
            return Err(IntegrationError::InputTooLong { needed, budget });
        }
        Ok(Self { question: question.to_string(), structures: Vec::new(), rendered: question.to_string(), budget })
    }

    pub fn token_count(&self) -> usize {
        token_count(&self.rendered)
    }
}

/// Renders the question followed by one structure per entity, removing the
/// lowest-ranked relations round-robin across entities (then type labels)
/// until the result fits `budget`.
pub fn build_encoder_input(
    store: &KbStore,
    question: &str,
    entities: &[LinkedEntity],
    budget: usize,
    scorer: &dyn RelationScorer,
) -> Result<EncoderInput, IntegrationError> {
    let structures = entities
        .iter()
        .map(|e| build_entity_structure(store, question, e, usize::MAX, scorer))
        .collect();
    fit_to_budget(question, structures, budget)
}

/// Shrinks already-built structures until the rendering fits `budget`.
pub fn fit_to_budget(
    question: &str,
    mut structures: Vec<EntityStructure>,
    budget: usize,
) -> Result<EncoderInput, IntegrationError> {
    let question_tokens = token_count(question);
    if question_tokens > budget {
        return Err(IntegrationError::InputTooLong { needed: question_tokens, budget });
    }
    let tokens = |s: &[EntityStructure]| question_tokens + s.iter().map(|s| token_count(&s.render())).sum::<usize>();

    let mut cursor = 0;
    while tokens(&structures) > budget {
        let n = structures.len();
        let Some(i) = (0..n).map(|k| (cursor + k) % n).find(|&i| !structures[i].relations.is_empty()) else {
            break;
        };
        structures[i].relations.pop();
        cursor = (i + 1) % n;
    }
    cursor = 0;
    while tokens(&structures) > budget {
        let n = structures.len();
        let Some(i) = (0..n).map(|k| (cursor + k) % n).find(|&i| structures[i].type_label.is_some()) else {
            break;
        };
        structures[i].type_label = None;
        cursor = (i + 1) % n;
    }
    let needed = tokens(&structures);
    if needed > budget {
        return Err(IntegrationError::InputTooLong { needed, budget });
    }
    let rendered = render_input(question, &structures);
    Ok(EncoderInput { question: question.to_string(), structures, rendered, budget })
}

/// Parsed form of one rendered structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureFields {
    pub mention: String,
    pub type_label: Option<String>,
    pub relations: Vec<String>,
}

/// Reads back the structures that follow the question in a rendered input.
pub fn parse_structures(tail: &str) -> Option<Vec<StructureFields>> {
    let mut out = Vec::new();
    let mut rest = tail.trim_start();
    while !rest.is_empty() {
        let body = rest.strip_prefix('[')?;
        let mut fields: Vec<String> = vec![String::new()];
        let mut relations: Vec<String> = vec![String::new()];
        let mut escaped = false;
        let mut end = None;
        for (i, c) in body.char_indices() {
            let in_relations = fields.len() == 3;
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
                continue;
            } else if c == ']' {
                end = Some(i);
                break;
            } else if c == '|' {
                fields.push(String::new());
                continue;
            } else if c == ',' && in_relations {
                relations.push(String::new());
                continue;
            } else if c == '[' {
                return None;
            }
            if in_relations {
                relations.last_mut()?.push(c);
            } else {
                fields.last_mut()?.push(c);
            }
        }
        let end = end?;
        if fields.len() != 3 {
            return None;
        }
        let strip = |s: &str| s.strip_prefix(' ').unwrap_or(s).to_string();
        let mention = fields[0].strip_suffix(' ').unwrap_or(&fields[0]).to_string();
        let type_label = {
            let t = strip(&fields[1]);
            let t = t.strip_suffix(' ').unwrap_or(&t).to_string();
            (!t.is_empty()).then_some(t)
        };
        let relations: Vec<String> = if relations.len() == 1 && relations[0].is_empty() {
            Vec::new()
        } else {
            relations.iter().map(|r| strip(r)).collect()
        };
        out.push(StructureFields { mention, type_label, relations });
        rest = body[end + 1..].strip_prefix(' ').unwrap_or(&body[end + 1..]);
    }
    Some(out)
}
