//! One question through encoder input, generation and validation.

use crate::generator::Generator;
use crate::integration::{build_encoder_input, EncoderInput, RelationScorer, DEFAULT_BUDGET};
use crate::kb::KbStore;
use crate::records::{LinkRecord, QuestionRecord};
use crate::validation::{fallback_result, link, LinkConfig};

#[derive(Debug, Clone)]
pub struct PipelineOptions {
    pub budget: usize,
    /// Feed the bare question to the generator and skip KB validation.
    pub without_kb: bool,
    pub link: LinkConfig,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self { budget: DEFAULT_BUDGET, without_kb: false, link: LinkConfig::default() }
    }
}

/// Never fails: problems with a single question become an error record.
pub fn process_question(
    store: &KbStore,
    generator: &dyn Generator,
    scorer: &dyn RelationScorer,
    record: &QuestionRecord,
    options: &PipelineOptions,
) -> LinkRecord {
    let error = |message: String| LinkRecord::Error { question_id: record.question_id.clone(), error: message };
    if let Some(bad) = record.entities.iter().find_map(|e| e.check(&record.question).err()) {
        return error(bad.to_string());
    }
    let input = if options.without_kb {
        EncoderInput::question_only(&record.question, options.budget)
    } else {
        build_encoder_input(store, &record.question, &record.entities, options.budget, scorer)
    };
    let input = match input {
        Ok(input) => input,
        Err(e) => return error(e.to_string()),
    };
    let beams = match generator.generate(&input, &record.question_id) {
        Ok(beams) => beams,
        Err(e) => return error(e.to_string()),
    };
    let result = if options.without_kb {
        fallback_result(store, &beams, options.link.beam_limit, &options.link.wh)
    } else {
        link(store, &record.question, &beams, &record.entities, &options.link)
    };
    LinkRecord::from_result(&record.question_id, result)
}
