//! Knowledge validation.
//!
//! Each argument-relation pair of a generated sequence expands into the
//! ways it could hold in the KB: the relation label resolved to every
//! namespace variant, with the argument on either side of the triple. Entity
//! arguments stay bound; placeholders become `?y`; the missing end is the
//! hub variable `?x` shared by all pairs. Candidate graphs are the cartesian
//! product of those alternatives, after dropping alternatives that cannot
//! hold on their own. A sequence is valid when some candidate graph joins in
//! the KB; beams are checked in rank order and the first valid one wins.
//!
//! Yes/no questions use bound triples instead: two entities sharing a
//! relation must be directly connected by it.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::generator::OutputSequence;
use crate::grammar::{detect_ask, parse_output, parse_pairs, ArgBinding, ResolvedPair, WhLexicon};
use crate::integration::LinkedEntity;
use crate::kb::{normalize_label, Binding, Iri, KbStore, PatternTerm, ProfileKind, RelationNamespace, TriplePattern, Variable};

pub const DEFAULT_BEAM_LIMIT: usize = 50;
pub const DEFAULT_ASK_BEAM_LIMIT: usize = 10;

/// One way a single pair can hold: the relation IRI it commits to and the
/// patterns that must match (two for Wikidata statement paths).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairPattern {
    pub relation: Iri,
    pub patterns: Vec<TriplePattern>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateGraph {
    pub choices: Vec<PairPattern>,
    /// Index of the chosen alternative per pair, in the unpruned expansion.
    pub choice_indices: Vec<usize>,
}

impl CandidateGraph {
    pub fn patterns(&self) -> Vec<TriplePattern> {
        self.choices.iter().flat_map(|c| c.patterns.iter().cloned()).collect()
    }

    /// Chosen relation IRIs in pair order, without repeats.
    pub fn relations(&self) -> Vec<Iri> {
        dedup(self.choices.iter().map(|c| c.relation.clone()))
    }
}

fn dedup(items: impl IntoIterator<Item = Iri>) -> Vec<Iri> {
    let mut seen = BTreeSet::new();
    items.into_iter().filter(|i| seen.insert(i.clone())).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkingResult {
    pub relations: Vec<Iri>,
    pub validated: bool,
    pub source_rank: Option<usize>,
    pub ask_answer: Option<bool>,
    /// The matched graph and its binding, when validated.
    pub witness: Option<(CandidateGraph, Binding)>,
}

impl LinkingResult {
    pub fn empty() -> Self {
        Self { relations: Vec::new(), validated: false, source_rank: None, ask_answer: None, witness: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkConfig {
    /// Beams scanned for ordinary questions.
    pub beam_limit: usize,
    /// Beams scanned for yes/no questions.
    pub ask_beam_limit: usize,
    #[serde(skip)]
    pub wh: WhLexicon,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self { beam_limit: DEFAULT_BEAM_LIMIT, ask_beam_limit: DEFAULT_ASK_BEAM_LIMIT, wh: WhLexicon::default() }
    }
}

/// Alternatives for `label` between `anchor` and `other`. `pair_index`
/// names the statement variable used by Wikidata statement paths.
///
/// DBpedia: for each `dbo:`/`dbp:` variant `r` (in that order),
/// `(anchor r other)` then `(other r anchor)`.
///
/// Wikidata, per property: the `wdt:` direct forms, then `p:`/`ps:`
/// statement paths, then `pq:` qualifier paths through every `p:` claim
/// that hosts the qualifier. Direct-only properties (P31, P279) stop after
/// the direct forms.
pub fn expand_pair(
    store: &KbStore,
    anchor: &PatternTerm,
    other: &PatternTerm,
    label: &str,
    pair_index: usize,
) -> Vec<PairPattern> {
    let profile = store.profile();
    let mut resolved: Vec<(RelationNamespace, &str, Iri)> = Vec::new();
    let candidates = store.lookup_relation_label(label);
    for iri in &candidates {
        if let Some((ns, local)) = profile.classify(iri) {
            resolved.push((ns, local, iri.clone()));
        }
    }
    let both_ways = |r: &Iri| {
        [
            PairPattern { relation: r.clone(), patterns: vec![TriplePattern::new(anchor.clone(), r.clone(), other.clone())] },
            PairPattern { relation: r.clone(), patterns: vec![TriplePattern::new(other.clone(), r.clone(), anchor.clone())] },
        ]
    };

    match profile.kind {
        ProfileKind::Dbpedia => {
            resolved.sort_by(|a, b| (a.0, &a.2).cmp(&(b.0, &b.2)));
            resolved.iter().flat_map(|(_, _, r)| both_ways(r)).collect()
        }
        ProfileKind::Wikidata => {
            let properties: BTreeSet<&str> = resolved.iter().map(|(_, local, _)| *local).collect();
            let statement = PatternTerm::Var(Variable::statement(pair_index));
            let present = |ns: RelationNamespace, local: &str| {
                profile.variant(ns, local).filter(|iri| store.has_predicate(iri))
            };
            let path = |claim: &Iri, value_pred: &Iri, relation: &Iri| {
                [
                    PairPattern {
                        relation: relation.clone(),
                        patterns: vec![
                            TriplePattern::new(anchor.clone(), claim.clone(), statement.clone()),
                            TriplePattern::new(statement.clone(), value_pred.clone(), other.clone()),
                        ],
                    },
                    PairPattern {
                        relation: relation.clone(),
                        patterns: vec![
                            TriplePattern::new(other.clone(), claim.clone(), statement.clone()),
                            TriplePattern::new(statement.clone(), value_pred.clone(), anchor.clone()),
                        ],
                    },
                ]
            };
            let mut out = Vec::new();
            for local in properties {
                if let Some(direct) = present(RelationNamespace::Direct, local) {
                    out.extend(both_ways(&direct));
                }
                if profile.is_direct_only(local) {
                    continue;
                }
                if let (Some(claim), Some(value)) =
                    (present(RelationNamespace::Claim, local), present(RelationNamespace::StatementValue, local))
                {
                    out.extend(path(&claim, &value, &claim));
                }
                if let Some(qualifier) = present(RelationNamespace::Qualifier, local) {
                    for host in store.qualifier_hosts(&qualifier) {
                        out.extend(path(&host, &qualifier, &qualifier));
                    }
                }
            }
            out
        }
    }
}

/// Alternatives for an entity argument bound to `entity`.
pub fn expand_entity_relation(store: &KbStore, entity: &Iri, label: &str, pair_index: usize) -> Vec<PairPattern> {
    expand_pair(store, &PatternTerm::iri(entity), &PatternTerm::Var(Variable::x()), label, pair_index)
}

/// Alternatives for a Wh placeholder, which becomes `?y`.
pub fn expand_placeholder_relation(store: &KbStore, label: &str, pair_index: usize) -> Vec<PairPattern> {
    expand_pair(store, &PatternTerm::Var(Variable::y()), &PatternTerm::Var(Variable::x()), label, pair_index)
}

/// Lazily walks the cartesian product of per-pair alternatives in
/// lexicographic order of choice indices.
pub struct GraphStream {
    options: Vec<Vec<(usize, PairPattern)>>,
    cursor: Option<Vec<usize>>,
}

impl GraphStream {
    pub fn new(options: Vec<Vec<(usize, PairPattern)>>) -> Self {
        let cursor = (!options.is_empty() && options.iter().all(|o| !o.is_empty())).then(|| vec![0; options.len()]);
        Self { options, cursor }
    }

    /// Product size (the number of graphs the stream will yield).
    pub fn size(&self) -> usize {
        if self.cursor.is_none() {
            return 0;
        }
        self.options.iter().map(Vec::len).product()
    }
}

impl Iterator for GraphStream {
    type Item = CandidateGraph;

    fn next(&mut self) -> Option<CandidateGraph> {
        let cursor = self.cursor.as_mut()?;
        let graph = CandidateGraph {
            choices: cursor.iter().zip(&self.options).map(|(&i, o)| o[i].1.clone()).collect(),
            choice_indices: cursor.iter().zip(&self.options).map(|(&i, o)| o[i].0).collect(),
        };
        // Odometer increment, last position fastest.
        let mut pos = cursor.len();
        loop {
            if pos == 0 {
                self.cursor = None;
                break;
            }
            pos -= 1;
            cursor[pos] += 1;
            if cursor[pos] < self.options[pos].len() {
                break;
            }
            cursor[pos] = 0;
        }
        Some(graph)
    }
}

/// Expansions for each pair, unpruned.
pub fn expand_pairs(store: &KbStore, pairs: &[(PatternTerm, String)]) -> Vec<Vec<PairPattern>> {
    pairs
        .iter()
        .enumerate()
        .map(|(i, (anchor, label))| expand_pair(store, anchor, &PatternTerm::Var(Variable::x()), label, i))
        .collect()
}

/// Candidate graphs for `pairs` (argument term, relation label), with
/// alternatives that cannot match on their own removed first.
pub fn enumerate_graphs(store: &KbStore, pairs: &[(PatternTerm, String)]) -> GraphStream {
    prune(store, expand_pairs(store, pairs))
}

fn prune(store: &KbStore, expansions: Vec<Vec<PairPattern>>) -> GraphStream {
    GraphStream::new(
        expansions
            .into_iter()
            .map(|alts| {
                alts.into_iter()
                    .enumerate()
                    .filter(|(_, alt)| store.is_satisfiable(&alt.patterns))
                    .collect()
            })
            .collect(),
    )
}

fn first_match(store: &KbStore, stream: GraphStream) -> Option<(CandidateGraph, Binding)> {
    stream.into_iter().find_map(|g| store.match_graph(&g.patterns()).map(|b| (g, b)))
}

/// Argument terms for resolved pairs; `None` if any entity argument could
/// not be tied to a linked entity.
fn anchors(pairs: &[ResolvedPair], entities: &[LinkedEntity]) -> Option<Vec<(PatternTerm, String)>> {
    pairs
        .iter()
        .map(|p| {
            let term = match p.binding {
                ArgBinding::Entity { index, .. } => PatternTerm::iri(&entities.get(index)?.iri),
                ArgBinding::Placeholder => PatternTerm::Var(Variable::y()),
                ArgBinding::Unresolved => return None,
            };
            Some((term, p.pair.relation.clone()))
        })
        .collect()
}

/// Validates one sequence: the first candidate graph with a KB match, if
/// any.
pub fn validate_sequence(
    store: &KbStore,
    sequence: &OutputSequence,
    entities: &[LinkedEntity],
    wh: &WhLexicon,
) -> Option<LinkingResult> {
    let pairs = parse_output(&sequence.text, entities, wh).ok()?;
    let anchored = anchors(&pairs, entities)?;
    let (graph, binding) = first_match(store, enumerate_graphs(store, &anchored))?;
    Some(LinkingResult {
        relations: graph.relations(),
        validated: true,
        source_rank: Some(sequence.rank),
        ask_answer: None,
        witness: Some((graph, binding)),
    })
}

/// Yes/no validation: pairs grouped by relation must name exactly two
/// entities each, and each group needs a bound triple between them.
pub fn validate_ask_sequence(
    store: &KbStore,
    sequence: &OutputSequence,
    entities: &[LinkedEntity],
    wh: &WhLexicon,
) -> Option<LinkingResult> {
    let pairs = parse_output(&sequence.text, entities, wh).ok()?;
    let mut groups: Vec<(String, String, Vec<Iri>)> = Vec::new();
    for p in &pairs {
        let ArgBinding::Entity { index, .. } = p.binding else {
            return None;
        };
        let iri = entities.get(index)?.iri.clone();
        let key = normalize_label(&p.pair.relation);
        match groups.iter_mut().find(|(k, _, _)| *k == key) {
            Some((_, _, members)) => members.push(iri),
            None => groups.push((key, p.pair.relation.clone(), vec![iri])),
        }
    }
    if groups.is_empty() || groups.iter().any(|(_, _, members)| members.len() != 2) {
        return None;
    }
    let expansions = groups
        .iter()
        .enumerate()
        .map(|(i, (_, label, members))| {
            expand_pair(store, &PatternTerm::iri(&members[0]), &PatternTerm::iri(&members[1]), label, i)
        })
        .collect();
    let (graph, binding) = first_match(store, prune(store, expansions))?;
    Some(LinkingResult {
        relations: graph.relations(),
        validated: true,
        source_rank: Some(sequence.rank),
        ask_answer: Some(true),
        witness: Some((graph, binding)),
    })
}

/// Best-effort URIs for an unvalidated beam: each label's preferred
/// namespace variant (`dbo:` before `dbp:`, `wdt:` before `p:`/`ps:`/`pq:`).
pub fn map_labels(store: &KbStore, sequence: &OutputSequence, wh: &WhLexicon) -> Option<Vec<Iri>> {
    let pairs = parse_pairs(&sequence.text, wh).ok()?;
    let profile = store.profile();
    let order = profile.relation_namespaces();
    Some(dedup(pairs.iter().filter_map(|p| {
        store
            .lookup_relation_label(&p.relation)
            .into_iter()
            .min_by_key(|iri| {
                let rank = profile
                    .classify(iri)
                    .and_then(|(ns, _)| order.iter().position(|o| *o == ns))
                    .unwrap_or(order.len());
                (rank, iri.clone())
            })
    })))
}

/// The top parseable beam among the first `limit`, mapped without
/// validation.
pub fn fallback_result(store: &KbStore, beams: &[OutputSequence], limit: usize, wh: &WhLexicon) -> LinkingResult {
    beams
        .iter()
        .take(limit)
        .find_map(|b| {
            map_labels(store, b, wh).map(|relations| LinkingResult {
                relations,
                validated: false,
                source_rank: Some(b.rank),
                ask_answer: None,
                witness: None,
            })
        })
        .unwrap_or_else(LinkingResult::empty)
}

/// Scans beams in rank order and returns the first one the KB supports,
/// falling back to the top beam's best-effort mapping.
pub fn link(
    store: &KbStore,
    question: &str,
    beams: &[OutputSequence],
    entities: &[LinkedEntity],
    config: &LinkConfig,
) -> LinkingResult {
    if beams.is_empty() {
        return LinkingResult::empty();
    }
    if detect_ask(question) {
        let hit = beams
            .iter()
            .take(config.ask_beam_limit)
            .find_map(|b| validate_ask_sequence(store, b, entities, &config.wh));
        return hit.unwrap_or_else(|| LinkingResult {
            ask_answer: Some(false),
            ..fallback_result(store, beams, config.ask_beam_limit, &config.wh)
        });
    }
    beams
        .iter()
        .take(config.beam_limit)
        .find_map(|b| validate_sequence(store, b, entities, &config.wh))
        .unwrap_or_else(|| fallback_result(store, beams, config.beam_limit, &config.wh))
}

#[cfg(test)]
mod tests;
