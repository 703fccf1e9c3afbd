use std::collections::{BTreeSet, HashMap};
use std::io::BufRead;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use rellink_core::evaluation::{aggregate, label_level_score, relaxed_score, score_sets, AnswerMatch, QuestionScore};
use rellink_core::kb::{Iri, PrefixTable, Profile};
use rellink_core::records::{GoldRecord, LinkRecord};

use crate::{open, KbArgs};

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EvalMode {
    Strict,
    /// Accepts dbo:/dbp: swaps of the gold graph with the same answers.
    Relaxed,
    /// Compares relation local names only.
    LabelLevel,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum AnswerMatchArg {
    Equal,
    Overlap,
}

#[derive(Args)]
pub struct EvalArgs {
    #[arg(long)]
    gold: PathBuf,
    #[arg(long)]
    predictions: PathBuf,
    #[arg(long, value_enum, default_value = "strict")]
    eval_mode: EvalMode,
    /// How relaxed mode compares answer sets.
    #[arg(long, value_enum, default_value = "equal")]
    answer_match: AnswerMatchArg,
    /// KB for relaxed mode.
    #[arg(long)]
    kb: Option<PathBuf>,
    #[arg(long)]
    ontology: Option<PathBuf>,
    #[arg(long, value_enum)]
    profile: Option<crate::ProfileArg>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Also write the full report as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
}

fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).with_context(|| format!("{}:{}", path.display(), i + 1))?);
    }
    Ok(out)
}

pub fn run(args: &EvalArgs) -> Result<()> {
    let gold: Vec<GoldRecord> = read_jsonl(&args.gold)?;
    let predictions: Vec<LinkRecord> = read_jsonl(&args.predictions)?;
    let by_id: HashMap<&str, &LinkRecord> = predictions.iter().map(|p| (p.question_id(), p)).collect();
    let gold_ids: BTreeSet<&str> = gold.iter().map(|g| g.question_id.as_str()).collect();
    let missing: Vec<&str> = gold.iter().map(|g| g.question_id.as_str()).filter(|id| !by_id.contains_key(id)).collect();
    let extra: Vec<&str> = predictions.iter().map(|p| p.question_id()).filter(|id| !gold_ids.contains(id)).collect();
    if !missing.is_empty() || !extra.is_empty() {
        bail!("question ids differ; missing predictions: [{}]; not in gold: [{}]", missing.join(", "), extra.join(", "));
    }

    let store = match (args.eval_mode, &args.kb) {
        (EvalMode::Relaxed, Some(kb)) => Some(
            KbArgs { kb: kb.clone(), ontology: args.ontology.clone(), profile: args.profile, config: args.config.clone() }
                .load()?,
        ),
        (EvalMode::Relaxed, None) => bail!("--eval-mode relaxed needs --kb"),
        _ => None,
    };
    let prefixes: PrefixTable = match &store {
        Some(store) => store.profile().prefixes.clone(),
        None => {
            let mut table = Profile::dbpedia().prefixes;
            for (name, base) in Profile::wikidata().prefixes.iter() {
                table.insert(name, base);
            }
            table
        }
    };
    let matching = match args.answer_match {
        AnswerMatchArg::Equal => AnswerMatch::Equal,
        AnswerMatchArg::Overlap => AnswerMatch::Overlap,
    };

    let mut scores = Vec::with_capacity(gold.len());
    for record in &gold {
        let gold_set: BTreeSet<Iri> = record.relation_iris(&prefixes)?.into_iter().collect();
        let pred_set: BTreeSet<Iri> = by_id[record.question_id.as_str()]
            .relations()
            .iter()
            .map(|r| prefixes.expand_iri(r.as_str()))
            .collect::<Result<_, _>>()?;
        let prf = match (args.eval_mode, &store) {
            (EvalMode::LabelLevel, _) => label_level_score(&gold_set, &pred_set),
            (EvalMode::Relaxed, Some(store)) => match record.graph_patterns(&prefixes)? {
                Some(graph) => {
                    relaxed_score(store, &gold_set, &graph, record.answer_var.as_deref(), &pred_set, matching)
                }
                None => {
                    tracing::warn!(question_id = record.question_id, "no gold graph; scoring strictly");
                    score_sets(&gold_set, &pred_set)
                }
            },
            _ => score_sets(&gold_set, &pred_set),
        };
        scores.push(QuestionScore {
            question_id: record.question_id.clone(),
            gold_count: gold_set.len(),
            pred_count: pred_set.len(),
            scores: prf,
        });
    }
    let report = aggregate(scores)?;
    print!("{}", report.to_table());
    if let Some(path) = &args.report {
        std::fs::write(path, serde_json::to_string_pretty(&report)?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}
