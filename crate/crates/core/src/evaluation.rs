//! Precision, recall and F1 over predicted relation sets.
//!
//! Scores are macro averages over questions. Relaxed scoring accepts any
//! `dbo:`/`dbp:` rewrite of the gold graph that yields the same answers.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use tracing::warn;

use crate::error::EvalError;
use crate::kb::{normalize_label, Iri, KbStore, Term, TriplePattern, Variable};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    pub fn new(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
        Self { precision, recall, f1 }
    }
}

fn ratio(hits: usize, total: usize, other_total: usize) -> f64 {
    match (total, other_total) {
        (0, 0) => 1.0,
        (0, _) => 0.0,
        _ => hits as f64 / total as f64,
    }
}

/// Set-based P/R/F1. An empty side scores 0 unless both are empty.
pub fn score_sets<T: Ord>(gold: &BTreeSet<T>, pred: &BTreeSet<T>) -> Prf {
    let hits = gold.intersection(pred).count();
    Prf::new(ratio(hits, pred.len(), gold.len()), ratio(hits, gold.len(), pred.len()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountBucket {
    Equal,
    More,
    Fewer,
}

impl CountBucket {
    pub fn of(gold: usize, pred: usize) -> Self {
        match pred.cmp(&gold) {
            std::cmp::Ordering::Equal => CountBucket::Equal,
            std::cmp::Ordering::Greater => CountBucket::More,
            std::cmp::Ordering::Less => CountBucket::Fewer,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionScore {
    pub question_id: String,
    pub gold_count: usize,
    pub pred_count: usize,
    #[serde(flatten)]
    pub scores: Prf,
}

impl QuestionScore {
    pub fn bucket(&self) -> CountBucket {
        CountBucket::of(self.gold_count, self.pred_count)
    }
}

/// Percentages of questions whose predicted relation count is equal to,
/// above, or below the gold count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountShares {
    pub equal: f64,
    pub more: f64,
    pub fewer: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub questions: Vec<QuestionScore>,
    #[serde(rename = "macro")]
    pub macro_avg: Prf,
    pub counts: CountShares,
}

pub fn aggregate(questions: Vec<QuestionScore>) -> Result<EvalReport, EvalError> {
    if questions.is_empty() {
        return Err(EvalError::Empty);
    }
    let n = questions.len() as f64;
    let mean = |f: fn(&Prf) -> f64| questions.iter().map(|q| f(&q.scores)).sum::<f64>() / n;
    let macro_avg = Prf { precision: mean(|p| p.precision), recall: mean(|p| p.recall), f1: mean(|p| p.f1) };
    let share = |b: CountBucket| 100.0 * questions.iter().filter(|q| q.bucket() == b).count() as f64 / n;
    let counts = CountShares {
        equal: share(CountBucket::Equal),
        more: share(CountBucket::More),
        fewer: share(CountBucket::Fewer),
    };
    Ok(EvalReport { questions, macro_avg, counts })
}

impl EvalReport {
    /// Plain-text summary in fixed-width columns.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<10} {:>9} {:>9} {:>9}", "questions", "P", "R", "F1");
        let _ = writeln!(
            out,
            "{:<10} {:>9.4} {:>9.4} {:>9.4}",
            self.questions.len(),
            self.macro_avg.precision,
            self.macro_avg.recall,
            self.macro_avg.f1
        );
        let _ = writeln!(out);
        let _ = writeln!(out, "{:<10} {:>9} {:>9} {:>9}", "count", "pred=gold", "pred>gold", "pred<gold");
        let _ = writeln!(
            out,
            "{:<10} {:>8.2}% {:>8.2}% {:>8.2}%",
            "", self.counts.equal, self.counts.more, self.counts.fewer
        );
        out
    }
}

pub fn score_question(question_id: &str, gold: &BTreeSet<Iri>, pred: &BTreeSet<Iri>) -> QuestionScore {
    QuestionScore {
        question_id: question_id.to_string(),
        gold_count: gold.len(),
        pred_count: pred.len(),
        scores: score_sets(gold, pred),
    }
}

/// Compares normalized local names instead of full IRIs, so `dbo:state`
/// and `dbp:state` count as the same relation.
pub fn label_level_score(gold: &BTreeSet<Iri>, pred: &BTreeSet<Iri>) -> Prf {
    let labels = |set: &BTreeSet<Iri>| set.iter().map(|i| normalize_label(i.local_name())).collect::<BTreeSet<_>>();
    score_sets(&labels(gold), &labels(pred))
}

/// When a namespace-swapped gold graph counts as equivalent.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnswerMatch {
    /// Same answer set as the original.
    #[default]
    Equal,
    /// At least one answer in common.
    Overlap,
}

/// The answer variable: `preferred` if given, else `?uri`, else `?x`, else
/// the first variable in the graph.
pub fn answer_variable(graph: &[TriplePattern], preferred: Option<&str>) -> Option<Variable> {
    let vars: Vec<&Variable> = graph.iter().flat_map(|p| p.variables()).collect();
    let has = |name: &str| vars.iter().find(|v| v.name() == name).map(|v| (*v).clone());
    preferred
        .map(Variable::new)
        .or_else(|| has("uri"))
        .or_else(|| has("x"))
        .or_else(|| vars.first().map(|v| (*v).clone()))
}

/// Namespace-swapped rewrites of `graph`, original first. Each position
/// whose predicate sits in an equivalent namespace may switch to the other.
pub fn namespace_variants(store: &KbStore, graph: &[TriplePattern]) -> Vec<Vec<TriplePattern>> {
    let profile = store.profile();
    let equivalent = profile.equivalent_namespaces();
    let options: Vec<Vec<Iri>> = graph
        .iter()
        .map(|p| {
            let mut opts = vec![p.predicate.clone()];
            if let Some((ns, local)) = profile.classify(&p.predicate) {
                if equivalent.contains(&ns) {
                    opts.extend(
                        equivalent
                            .iter()
                            .filter(|other| **other != ns)
                            .filter_map(|other| profile.variant(*other, local)),
                    );
                }
            }
            opts
        })
        .collect();
    let mut variants = vec![Vec::new()];
    for (pattern, opts) in graph.iter().zip(&options) {
        variants = variants
            .into_iter()
            .flat_map(|prefix: Vec<TriplePattern>| {
                opts.iter().map(move |predicate| {
                    let mut next = prefix.clone();
                    next.push(TriplePattern { predicate: predicate.clone(), ..pattern.clone() });
                    next
                })
            })
            .collect();
    }
    variants
}

fn answers_of(store: &KbStore, graph: &[TriplePattern], var: Option<&Variable>) -> BTreeSet<Term> {
    match var {
        Some(v) => store.answers(graph, v),
        None => BTreeSet::new(),
    }
}

/// Best F1 over the gold relations and every equivalent rewrite of the
/// gold graph. Never below the strict score.
pub fn relaxed_score(
    store: &KbStore,
    gold_relations: &BTreeSet<Iri>,
    gold_graph: &[TriplePattern],
    answer_var: Option<&str>,
    pred: &BTreeSet<Iri>,
    matching: AnswerMatch,
) -> Prf {
    let strict = score_sets(gold_relations, pred);
    if !store.is_satisfiable(gold_graph) {
        warn!("gold graph has no match in the KB; scoring strictly");
        return strict;
    }
    let var = answer_variable(gold_graph, answer_var);
    let original = answers_of(store, gold_graph, var.as_ref());
    let graph_predicates: BTreeSet<&Iri> = gold_graph.iter().map(|p| &p.predicate).collect();
    let mut best = strict;
    for variant in namespace_variants(store, gold_graph).into_iter().skip(1) {
        if !store.is_satisfiable(&variant) {
            continue;
        }
        let answers = answers_of(store, &variant, var.as_ref());
        let equivalent = match matching {
            AnswerMatch::Equal => answers == original,
            AnswerMatch::Overlap => var.is_none() || !answers.is_disjoint(&original),
        };
        if !equivalent {
            continue;
        }
        let relations: BTreeSet<Iri> = gold_relations
            .iter()
            .filter(|r| !graph_predicates.contains(r))
            .cloned()
            .chain(variant.iter().map(|p| p.predicate.clone()))
            .collect();
        let score = score_sets(&relations, pred);
        if score.f1 > best.f1 {
            best = score;
        }
    }
    best
}
