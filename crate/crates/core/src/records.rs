//! JSON Lines records exchanged by the pipeline stages.

use serde::{Deserialize, Serialize};

use crate::error::TermError;
use crate::integration::LinkedEntity;
use crate::kb::{Iri, PatternTerm, PrefixTable, TriplePattern};
use crate::validation::LinkingResult;

/// A question with its linked entities.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionRecord {
    pub question_id: String,
    pub question: String,
    #[serde(default)]
    pub entities: Vec<LinkedEntity>,
}

impl QuestionRecord {
    /// Expands compact entity IRIs (`dbr:X`) through `prefixes`.
    pub fn expand_iris(&mut self, prefixes: &PrefixTable) -> Result<(), TermError> {
        for entity in &mut self.entities {
            entity.iri = prefixes.expand_iri(entity.iri.as_str())?;
        }
        Ok(())
    }
}

/// One output line of `link`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LinkRecord {
    Result {
        question_id: String,
        relations: Vec<Iri>,
        validated: bool,
        source_rank: Option<usize>,
        ask_answer: Option<bool>,
    },
    Error {
        question_id: String,
        error: String,
    },
}

impl LinkRecord {
    pub fn from_result(question_id: impl Into<String>, result: LinkingResult) -> Self {
        LinkRecord::Result {
            question_id: question_id.into(),
            relations: result.relations,
            validated: result.validated,
            source_rank: result.source_rank,
            ask_answer: result.ask_answer,
        }
    }

    pub fn question_id(&self) -> &str {
        match self {
            LinkRecord::Result { question_id, .. } | LinkRecord::Error { question_id, .. } => question_id,
        }
    }

    /// Predicted relations; error records predict nothing.
    pub fn relations(&self) -> &[Iri] {
        match self {
            LinkRecord::Result { relations, .. } => relations,
            LinkRecord::Error { .. } => &[],
        }
    }
}

/// Gold annotation. IRIs may be compact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldRecord {
    pub question_id: String,
    #[serde(default)]
    pub question: String,
    pub relations: Vec<String>,
    /// `[subject, predicate, object]` per pattern; `?name` for variables.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<Vec<[String; 3]>>,
    /// Variable holding the answer; defaults to `?uri`, then `?x`, then
    /// the first variable in the graph.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answer_var: Option<String>,
}

impl GoldRecord {
    pub fn relation_iris(&self, prefixes: &PrefixTable) -> Result<Vec<Iri>, TermError> {
        self.relations.iter().map(|r| prefixes.expand_iri(r)).collect()
    }

    pub fn graph_patterns(&self, prefixes: &PrefixTable) -> Result<Option<Vec<TriplePattern>>, TermError> {
        let Some(graph) = &self.graph else {
            return Ok(None);
        };
        graph
            .iter()
            .map(|[s, p, o]| {
                Ok(TriplePattern::new(
                    gold_term(s, prefixes)?,
                    prefixes.expand_iri(p.trim().trim_start_matches('<').trim_end_matches('>'))?,
                    gold_term(o, prefixes)?,
                ))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }
}

fn gold_term(text: &str, prefixes: &PrefixTable) -> Result<PatternTerm, TermError> {
    let text = text.trim();
    if text.starts_with(['?', '"']) || text.starts_with("_:") {
        return PatternTerm::parse(text);
    }
    let bare = text.trim_start_matches('<').trim_end_matches('>');
    Ok(PatternTerm::iri(&prefixes.expand_iri(bare)?))
}
