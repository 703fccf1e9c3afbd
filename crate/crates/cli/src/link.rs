use std::fs::File;
use std::io::{self, BufRead, BufWriter, Write};
use std::path::PathBuf;
use std::time::Duration;

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use rayon::prelude::*;
use rellink_core::generator::{GeneratorConfig, GeneratorKind, DEFAULT_BEAM_WIDTH};
use rellink_core::grammar::WhLexicon;
use rellink_core::integration::{RelationScorer, TrigramScorer, WordVectorScorer, DEFAULT_BUDGET};
use rellink_core::kb::KbStore;
use rellink_core::pipeline::{process_question, PipelineOptions};
use rellink_core::records::{LinkRecord, QuestionRecord};
use rellink_core::validation::{LinkConfig, DEFAULT_ASK_BEAM_LIMIT};

use crate::{open, KbArgs};

const CHUNK: usize = 1024;
const DEFAULT_TIMEOUT_SECS: u64 = 30;

#[derive(Clone, Copy, ValueEnum)]
pub enum GeneratorArg {
    Fixture,
    Remote,
    Baseline,
}

#[derive(Args)]
pub struct LinkArgs {
    #[command(flatten)]
    kb: KbArgs,
    /// Questions with linked entities, one JSON object per line.
    #[arg(long)]
    questions: PathBuf,
    /// Output file; stdout if omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "baseline")]
    generator: GeneratorArg,
    /// Beam fixture file for `--generator fixture`.
    #[arg(long, required_if_eq("generator", "fixture"))]
    fixtures: Option<PathBuf>,
    /// Model server base URL for `--generator remote`.
    #[arg(long, env = "RELLINK_ENDPOINT")]
    endpoint: Option<String>,
    #[arg(long, env = "RELLINK_TIMEOUT_SECS")]
    timeout_secs: Option<u64>,
    /// Beams requested and scanned per question.
    #[arg(long, default_value_t = DEFAULT_BEAM_WIDTH, value_parser = positive)]
    beams: usize,
    /// Beams scanned for yes/no questions.
    #[arg(long, default_value_t = DEFAULT_ASK_BEAM_LIMIT, value_parser = positive)]
    ask_beams: usize,
    /// Token budget of the generator input.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: usize,
    /// Question-only input, no KB validation.
    #[arg(long)]
    wo_kb: bool,
    /// Word vectors (`token v1 ... vD` per line) for relation ranking.
    #[arg(long)]
    vectors: Option<PathBuf>,
    #[arg(long, default_value_t = 1, value_parser = positive)]
    workers: usize,
}

impl LinkArgs {
    fn generator_config(&self) -> Result<GeneratorConfig> {
        let file = self.kb.config()?.generator;
        let kind = match self.generator {
            GeneratorArg::Fixture => GeneratorKind::Fixture { path: self.fixtures.clone().expect("enforced by clap") },
            GeneratorArg::Remote => GeneratorKind::Remote {
                endpoint: self
                    .endpoint
                    .clone()
                    .or(file.endpoint)
                    .context("remote generator needs --endpoint, RELLINK_ENDPOINT or [generator] endpoint")?,
                timeout: Duration::from_secs(self.timeout_secs.or(file.timeout_secs).unwrap_or(DEFAULT_TIMEOUT_SECS)),
            },
            GeneratorArg::Baseline => GeneratorKind::Baseline,
        };
        Ok(GeneratorConfig { kind, beam_width: self.beams })
    }
}

fn positive(text: &str) -> Result<usize, String> {
    match text.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

/// Question id of a line that failed to parse, if one can be recovered.
fn salvage_id(line: &str, number: usize) -> String {
    serde_json::from_str::<serde_json::Value>(line)
        .ok()
        .and_then(|v| v.get("question_id").and_then(|id| id.as_str()).map(str::to_string))
        .unwrap_or_else(|| format!("line {number}"))
}

fn parse_question(line: &str, number: usize, store: &KbStore) -> Result<QuestionRecord, LinkRecord> {
    let mut record: QuestionRecord = serde_json::from_str(line)
        .map_err(|e| LinkRecord::Error { question_id: salvage_id(line, number), error: format!("line {number}: {e}") })?;
    record
        .expand_iris(&store.profile().prefixes)
        .map_err(|e| LinkRecord::Error { question_id: record.question_id.clone(), error: e.to_string() })?;
    Ok(record)
}

pub fn run(args: &LinkArgs) -> Result<()> {
    let store = args.kb.load()?;
    let wh = WhLexicon::default();
    let generator = args.generator_config()?.build(store.relation_labels(), wh.clone())?;
    let scorer: Box<dyn RelationScorer> = match &args.vectors {
        Some(path) => Box::new(WordVectorScorer::from_path(path)?),
        None => Box::new(TrigramScorer),
    };
    let options = PipelineOptions {
        budget: args.budget,
        without_kb: args.wo_kb,
        link: LinkConfig { beam_limit: args.beams, ask_beam_limit: args.ask_beams, wh },
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(args.workers).build()?;

    let mut out: Box<dyn Write> = match &args.output {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let mut lines = open(&args.questions)?.lines().enumerate().filter(|(_, l)| !matches!(l, Ok(l) if l.trim().is_empty()));
    loop {
        let chunk: Vec<(usize, String)> = lines
            .by_ref()
            .take(CHUNK)
            .map(|(i, l)| l.map(|l| (i + 1, l)))
            .collect::<io::Result<_>>()
            .context("reading questions")?;
        if chunk.is_empty() {
            break;
        }
        let records: Vec<LinkRecord> = pool.install(|| {
            chunk
                .par_iter()
                .map(|(number, line)| match parse_question(line, *number, &store) {
                    Ok(question) => process_question(&store, generator.as_ref(), scorer.as_ref(), &question, &options),
                    Err(error) => error,
                })
                .collect()
        });
        for record in records {
            if let LinkRecord::Error { question_id, error } = &record {
                tracing::warn!(question_id, error, "question failed");
            }
            serde_json::to_writer(&mut out, &record)?;
            out.write_all(b"\n")?;
        }
    }
    out.flush()?;
    Ok(())
}
