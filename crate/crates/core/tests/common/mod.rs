//! Random linking fixtures and a brute-force reference linker.
//!
//! The reference works on raw IRI strings: it expands every pair without
//! pruning, walks the full product in index order and checks each graph
//! by trying every assignment of `?x`/`?y` over the fixture's terms.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rellink_core::generator::OutputSequence;
use rellink_core::integration::LinkedEntity;
use rellink_core::kb::{load_kb, Iri, KbStore, Profile};
use rellink_core::validation::{link, LinkConfig, LinkingResult};

pub const DBR: &str = "http://dbpedia.org/resource/";
pub const DBO: &str = "http://dbpedia.org/ontology/";
pub const DBP: &str = "http://dbpedia.org/property/";

const LABELS: [&str; 3] = ["a", "b", "c"];
const ASKED: [&str; 4] = ["a", "b", "c", "z"];
const ENTITIES: usize = 3;
const NODES: usize = 6;
pub const QUESTION: &str = "Who connects e0, e1 and e2?";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arg {
    Entity(usize),
    Who,
}

#[derive(Debug, Clone)]
pub struct Case {
    pub triples: Vec<(String, String, String)>,
    pub beams: Vec<Vec<(Arg, &'static str)>>,
}

fn node(i: usize) -> String {
    if i < ENTITIES {
        format!("{DBR}e{i}")
    } else {
        format!("{DBR}n{}", i - ENTITIES)
    }
}

impl Case {
    pub fn random(seed: u64) -> Self {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut predicates = Vec::new();
        for label in LABELS {
            for ns in [DBO, DBP] {
                if rng.gen_bool(0.6) {
                    predicates.push(format!("{ns}{label}"));
                }
            }
        }
        let n = if predicates.is_empty() { 0 } else { rng.gen_range(0..=50) };
        let triples = (0..n)
            .map(|_| {
                (
                    node(rng.gen_range(0..NODES)),
                    predicates[rng.gen_range(0..predicates.len())].clone(),
                    node(rng.gen_range(0..NODES)),
                )
            })
            .collect();
        let beams = (0..rng.gen_range(1..=3))
            .map(|_| {
                (0..rng.gen_range(1..=3))
                    .map(|_| {
                        let arg = if rng.gen_bool(0.75) { Arg::Entity(rng.gen_range(0..ENTITIES)) } else { Arg::Who };
                        (arg, ASKED[rng.gen_range(0..ASKED.len())])
                    })
                    .collect()
            })
            .collect();
        Case { triples, beams }
    }

    pub fn ntriples(&self) -> String {
        self.triples.iter().map(|(s, p, o)| format!("<{s}> <{p}> <{o}> .\n")).collect()
    }

    pub fn store(&self) -> KbStore {
        load_kb(self.ntriples().as_bytes(), None::<&[u8]>, Profile::dbpedia()).unwrap()
    }

    pub fn entities(&self) -> Vec<LinkedEntity> {
        (0..ENTITIES)
            .map(|i| {
                let mention = format!("e{i}");
                let start = QUESTION.find(&mention).unwrap();
                LinkedEntity::new(QUESTION, start, start + 2, Iri::new(node(i)).unwrap()).unwrap()
            })
            .collect()
    }

    pub fn sequences(&self) -> Vec<OutputSequence> {
        self.beams
            .iter()
            .enumerate()
            .map(|(i, pairs)| {
                let text = pairs
                    .iter()
                    .map(|(arg, label)| match arg {
                        Arg::Entity(e) => format!("[e{e} | {label}]"),
                        Arg::Who => format!("[Who | {label}]"),
                    })
                    .collect::<Vec<_>>()
                    .join(", ");
                OutputSequence { text, score: -(i as f64), rank: i + 1 }
            })
            .collect()
    }

    pub fn link(&self) -> LinkingResult {
        link(&self.store(), QUESTION, &self.sequences(), &self.entities(), &LinkConfig::default())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Slot {
    Const(String),
    X,
    Y,
}

type Pattern = (Slot, String, Slot);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expected {
    pub validated: bool,
    pub relations: Vec<String>,
    pub source_rank: Option<usize>,
    pub choices: Option<Vec<usize>>,
}

impl Expected {
    pub fn of(result: &LinkingResult) -> Self {
        Self {
            validated: result.validated,
            relations: result.relations.iter().map(|r| r.as_str().to_string()).collect(),
            source_rank: result.source_rank,
            choices: result.witness.as_ref().map(|(g, _)| g.choice_indices.clone()),
        }
    }
}

pub struct Oracle<'a> {
    case: &'a Case,
    facts: HashSet<(String, String, String)>,
    domain: Vec<String>,
    predicates: BTreeSet<String>,
}

impl<'a> Oracle<'a> {
    pub fn new(case: &'a Case) -> Self {
        let facts: HashSet<_> = case.triples.iter().cloned().collect();
        let domain: BTreeSet<String> = case.triples.iter().flat_map(|(s, _, o)| [s.clone(), o.clone()]).collect();
        let predicates = case.triples.iter().map(|(_, p, _)| p.clone()).collect();
        Self { case, facts, domain: domain.into_iter().collect(), predicates }
    }

    fn alternatives(&self, arg: Arg, label: &str) -> Vec<(String, Pattern)> {
        let anchor = match arg {
            Arg::Entity(e) => Slot::Const(node(e)),
            Arg::Who => Slot::Y,
        };
        let mut out = Vec::new();
        for ns in [DBO, DBP] {
            let r = format!("{ns}{label}");
            if self.predicates.contains(&r) {
                out.push((r.clone(), (anchor.clone(), r.clone(), Slot::X)));
                out.push((r.clone(), (Slot::X, r.clone(), anchor.clone())));
            }
        }
        out
    }

    fn holds(&self, graph: &[&Pattern]) -> bool {
        let uses = |v: &Slot| graph.iter().any(|(s, _, o)| s == v || o == v);
        let xs: Vec<Option<&String>> = if uses(&Slot::X) { self.domain.iter().map(Some).collect() } else { vec![None] };
        let ys: Vec<Option<&String>> = if uses(&Slot::Y) { self.domain.iter().map(Some).collect() } else { vec![None] };
        xs.iter().any(|x| {
            ys.iter().any(|y| {
                graph.iter().all(|(s, p, o)| {
                    let value = |slot: &Slot| match slot {
                        Slot::Const(c) => Some(c.clone()),
                        Slot::X => x.cloned(),
                        Slot::Y => y.cloned(),
                    };
                    match (value(s), value(o)) {
                        (Some(s), Some(o)) => self.facts.contains(&(s, p.clone(), o)),
                        _ => false,
                    }
                })
            })
        })
    }

    /// First satisfiable graph for one beam: relations and choice indices.
    pub fn validate(&self, pairs: &[(Arg, &str)]) -> Option<(Vec<String>, Vec<usize>)> {
        let options: Vec<_> = pairs.iter().map(|(arg, label)| self.alternatives(*arg, label)).collect();
        if options.iter().any(Vec::is_empty) {
            return None;
        }
        let total: usize = options.iter().map(Vec::len).product();
        for mut code in 0..total {
            let mut idx = vec![0; options.len()];
            for pos in (0..options.len()).rev() {
                idx[pos] = code % options[pos].len();
                code /= options[pos].len();
            }
            let graph: Vec<&Pattern> = idx.iter().zip(&options).map(|(&i, o)| &o[i].1).collect();
            if self.holds(&graph) {
                let mut relations: Vec<String> = Vec::new();
                for (&i, o) in idx.iter().zip(&options) {
                    if !relations.contains(&o[i].0) {
                        relations.push(o[i].0.clone());
                    }
                }
                return Some((relations, idx));
            }
        }
        None
    }

    pub fn link(&self) -> Expected {
        for (i, pairs) in self.case.beams.iter().enumerate() {
            if let Some((relations, choices)) = self.validate(pairs) {
                return Expected { validated: true, relations, source_rank: Some(i + 1), choices: Some(choices) };
            }
        }
        let mut relations: Vec<String> = Vec::new();
        for (_, label) in &self.case.beams[0] {
            let pick = [DBO, DBP].iter().map(|ns| format!("{ns}{label}")).find(|r| self.predicates.contains(r));
            if let Some(r) = pick {
                if !relations.contains(&r) {
                    relations.push(r);
                }
            }
        }
        Expected { validated: false, relations, source_rank: Some(1), choices: None }
    }
}
