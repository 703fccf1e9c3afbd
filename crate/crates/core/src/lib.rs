//! Relation linking for knowledge-base question answering.
//!
//! The pipeline enriches a question with KB context for a sequence
//! generator, parses the generator's `[argument | relation]` output, and
//! re-ranks candidate outputs by checking them against the KB.

pub mod error;
pub mod kb;
pub mod grammar;
pub mod integration;
pub mod generator;
pub mod validation;
pub mod evaluation;
pub mod records;
pub mod pipeline;
