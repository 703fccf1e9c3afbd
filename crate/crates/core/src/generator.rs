//! Sources of ranked output sequences.
//!
//! Three interchangeable backends sit behind [`Generator`]:
//!
//! - [`FixtureGenerator`] replays beams stored per question in a JSON Lines
//!   file.
//! - [`RemoteGenerator`] posts the rendered input to a model server
//!   (`POST /generate`, `{"input", "beams"}` in, `{"sequences": [...]}` out).
//! - [`BaselineGenerator`] pairs each entity with its best-ranked candidate
//!   relations, so the pipeline runs without any trained model.
//!
//! Every backend returns at most `beam_width` sequences ordered by
//! descending score, ties broken by text, ranked from 1.

use std::collections::HashMap;
use std::io::BufRead;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use tracing::warn;

use crate::error::GeneratorError;
use crate::grammar::{serialize_target, ArgRelPair, WhLexicon};
use crate::integration::{rank_candidate_relations, EncoderInput, RelationScorer, TrigramScorer};

pub const DEFAULT_BEAM_WIDTH: usize = 50;

/// One generated sequence. The text is kept verbatim; malformed text is
/// rejected later, during validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputSequence {
    pub text: String,
    /// Log-probability scale, higher is better.
    pub score: f64,
    /// 1-based position in the beam set.
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredText {
    pub text: String,
    pub score: f64,
}

/// Sorts by descending score (ties by text), truncates to `width`, assigns
/// ranks.
pub fn rank_sequences(mut beams: Vec<ScoredText>, width: usize) -> Vec<OutputSequence> {
    beams.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.text.cmp(&b.text)));
    beams
        .into_iter()
        .take(width)
        .enumerate()
        .map(|(i, b)| OutputSequence { text: b.text, score: b.score, rank: i + 1 })
        .collect()
}

pub trait Generator: Send + Sync {
    fn generate(&self, input: &EncoderInput, question_id: &str) -> Result<Vec<OutputSequence>, GeneratorError>;
}

#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorKind {
    Fixture { path: PathBuf },
    Remote { endpoint: String, timeout: Duration },
    Baseline,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub kind: GeneratorKind,
    pub beam_width: usize,
}

impl GeneratorConfig {
    /// Instantiates the configured backend. `vocabulary` is the relation
    /// label set the baseline falls back to when no entity offers
    /// candidates.
    pub fn build(&self, vocabulary: Vec<String>, wh: WhLexicon) -> Result<Box<dyn Generator>, GeneratorError> {
        if self.beam_width == 0 {
            return Err(GeneratorError::ZeroWidth);
        }
        Ok(match &self.kind {
            GeneratorKind::Fixture { path } => Box::new(FixtureGenerator::from_path(path, self.beam_width)?),
            GeneratorKind::Remote { endpoint, timeout } => {
                Box::new(RemoteGenerator::new(endpoint, *timeout, self.beam_width)?)
            }
            GeneratorKind::Baseline => Box::new(BaselineGenerator::new(self.beam_width, vocabulary, wh)),
        })
    }
}

/// Beam fixture line: `{"question_id", "beams": [{"text", "score"}]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BeamRecord {
    pub question_id: String,
    pub beams: Vec<ScoredText>,
}

#[derive(Debug, Clone)]
pub struct FixtureGenerator {
    beams: HashMap<String, Vec<OutputSequence>>,
}

impl FixtureGenerator {
    pub fn from_reader<R: BufRead>(reader: R, width: usize) -> Result<Self, GeneratorError> {
        let mut beams = HashMap::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| GeneratorError::Fixture(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let record: BeamRecord = serde_json::from_str(&line)
                .map_err(|e| GeneratorError::Fixture(format!("line {}: {e}", idx + 1)))?;
            let ranked = rank_sequences(record.beams, width);
            if beams.insert(record.question_id.clone(), ranked).is_some() {
                return Err(GeneratorError::Fixture(format!(
                    "line {}: duplicate question_id {:?}",
                    idx + 1,
                    record.question_id
                )));
            }
        }
        Ok(Self { beams })
    }

    pub fn from_path(path: &Path, width: usize) -> Result<Self, GeneratorError> {
        let file = std::fs::File::open(path).map_err(|e| GeneratorError::Fixture(format!("{}: {e}", path.display())))?;
        Self::from_reader(std::io::BufReader::new(file), width)
    }
}

impl Generator for FixtureGenerator {
    fn generate(&self, _input: &EncoderInput, question_id: &str) -> Result<Vec<OutputSequence>, GeneratorError> {
        match self.beams.get(question_id) {
            Some(beams) => Ok(beams.clone()),
            None => {
                warn!(question_id, "no fixture beams for question");
                Ok(Vec::new())
            }
        }
    }
}

#[derive(Debug, Serialize)]
struct RemoteRequest<'a> {
    input: &'a str,
    beams: usize,
}

#[derive(Debug, Deserialize)]
struct RemoteReply {
    sequences: Vec<ScoredText>,
}

/// Blocking HTTP client; shareable across worker threads.
#[derive(Debug, Clone)]
pub struct RemoteGenerator {
    client: reqwest::blocking::Client,
    url: String,
    width: usize,
}

impl RemoteGenerator {
    pub fn new(endpoint: &str, timeout: Duration, width: usize) -> Result<Self, GeneratorError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| GeneratorError::Transport(e.to_string()))?;
        let base = endpoint.trim_end_matches('/');
        let url = if base.ends_with("/generate") { base.to_string() } else { format!("{base}/generate") };
        Ok(Self { client, url, width })
    }
}

impl Generator for RemoteGenerator {
    fn generate(&self, input: &EncoderInput, _question_id: &str) -> Result<Vec<OutputSequence>, GeneratorError> {
        let response = self
            .client
            .post(&self.url)
            .json(&RemoteRequest { input: &input.rendered, beams: self.width })
            .send()
            .map_err(|e| GeneratorError::Transport(e.to_string()))?;
        let status = response.status();
        if !status.is_success() {
            return Err(GeneratorError::Transport(format!("HTTP {status}")));
        }
        let body = response.text().map_err(|e| GeneratorError::Transport(e.to_string()))?;
        let reply: RemoteReply = serde_json::from_str(&body).map_err(|e| GeneratorError::Reply(e.to_string()))?;
        Ok(rank_sequences(reply.sequences, self.width))
    }
}

/// Deterministic stand-in for a trained model.
pub struct BaselineGenerator {
    width: usize,
    vocabulary: Vec<String>,
    wh: WhLexicon,
    scorer: Box<dyn RelationScorer>,
}

impl BaselineGenerator {
    pub fn new(width: usize, vocabulary: Vec<String>, wh: WhLexicon) -> Self {
        Self { width, vocabulary, wh, scorer: Box::new(TrigramScorer) }
    }

    pub fn with_scorer(mut self, scorer: Box<dyn RelationScorer>) -> Self {
        self.scorer = scorer;
        self
    }
}

impl Generator for BaselineGenerator {
    fn generate(&self, input: &EncoderInput, _question_id: &str) -> Result<Vec<OutputSequence>, GeneratorError> {
        let mut beams = baseline_generate(input, self.width);
        if beams.is_empty() && input.structures.iter().all(|s| s.relations.is_empty()) {
            beams = placeholder_fallback(&input.question, &self.vocabulary, &self.wh, self.scorer.as_ref());
        }
        Ok(beams)
    }
}

/// Smallest `k >= 1` with `k^entities >= width`.
fn per_entity_choices(width: usize, entities: u32) -> usize {
    let mut k = 1usize;
    while k.checked_pow(entities).is_some_and(|p| p < width) {
        k += 1;
    }
    k
}

/// Cartesian product of each entity's top-k relations, scored by summed
/// similarity. Entities without candidate relations are left out; with none
/// left the result is empty.
pub fn baseline_generate(input: &EncoderInput, width: usize) -> Vec<OutputSequence> {
    let entities: Vec<_> = input.structures.iter().filter(|s| !s.relations.is_empty()).collect();
    if entities.is_empty() || width == 0 {
        return Vec::new();
    }
    let k = per_entity_choices(width, entities.len() as u32);
    let mut partial: Vec<(Vec<ArgRelPair>, f64)> = vec![(Vec::new(), 0.0)];
    for s in &entities {
        let mut next = Vec::with_capacity(partial.len() * k);
        for (pairs, score) in &partial {
            for rel in s.relations.iter().take(k) {
                let mut pairs = pairs.clone();
                pairs.push(ArgRelPair::entity(s.mention.clone(), rel.label.clone()));
                next.push((pairs, score + rel.score));
            }
        }
        partial = next;
    }
    let scored = partial
        .into_iter()
        .filter_map(|(pairs, score)| serialize_target(&pairs).ok().map(|text| ScoredText { text, score }))
        .collect();
    rank_sequences(scored, width)
}

/// One `[Wh | label]` sequence using the label from `vocabulary` that best
/// fits the question.
pub fn placeholder_fallback(
    question: &str,
    vocabulary: &[String],
    wh: &WhLexicon,
    scorer: &dyn RelationScorer,
) -> Vec<OutputSequence> {
    let Some(top) = rank_candidate_relations(question, vocabulary, scorer).into_iter().next() else {
        return Vec::new();
    };
    let term = wh.find_in(question).unwrap_or_else(|| "What".to_string());
    match serialize_target(&[ArgRelPair::placeholder(term, top.label)]) {
        Ok(text) => vec![OutputSequence { text, score: top.score, rank: 1 }],
        Err(_) => Vec::new(),
    }
}
