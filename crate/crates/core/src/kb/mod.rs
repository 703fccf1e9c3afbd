//! In-memory knowledge base.
//!
//! Triples are interned and kept in three sorted orderings (`spo`, `pos`,
//! `osp`) so every access pattern used by the matcher is a range scan. The
//! store also carries the ontology metadata needed upstream: the class
//! hierarchy, per-class instance counts and a relation label lexicon.
//!
//! The store is immutable once built.

mod ntriples;
mod ontology;
mod profile;
mod term;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::BufRead;
use std::ops::ControlFlow;

pub use ntriples::{parse_line as parse_ntriples_line, read_ntriples};
pub use ontology::{read_ontology, OntologyRecord};
pub use profile::{
    GeneratorSection, PrefixTable, Profile, ProfileConfig, ProfileKind, RelationNamespace, RDFS_SUBCLASS_OF, RDF_TYPE,
};
pub use term::{Iri, PatternTerm, Term, Triple, TriplePattern, Variable};

use crate::error::LoadError;

type TermId = u32;

/// Variable assignment produced by [`KbStore::match_graph`].
pub type Binding = BTreeMap<Variable, Term>;

/// Groups predicate IRIs that are variants of one relation: same local name
/// across the profile's relation namespaces (`dbo:almaMater` and
/// `dbp:almaMater`; `wdt:P176`, `p:P176`, `ps:P176`, `pq:P176`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RelationKey {
    Profile(String),
    Other(Iri),
}

/// Case-folds and drops everything but letters and digits, so
/// `owningOrganisation`, `owning organisation` and `Owning_Organisation`
/// collapse to the same key.
pub fn normalize_label(label: &str) -> String {
    label.chars().filter(|c| c.is_alphanumeric()).flat_map(char::to_lowercase).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct KbStore {
    profile: Profile,
    terms: Vec<Term>,
    ids: HashMap<Term, TermId>,
    spo: BTreeSet<(TermId, TermId, TermId)>,
    pos: BTreeSet<(TermId, TermId, TermId)>,
    osp: BTreeSet<(TermId, TermId, TermId)>,
    parents: BTreeMap<Iri, BTreeSet<Iri>>,
    instance_counts: BTreeMap<Iri, u64>,
    labels: BTreeMap<Iri, String>,
    relation_labels: BTreeMap<RelationKey, Vec<String>>,
    variants: BTreeMap<RelationKey, BTreeSet<Iri>>,
    lexicon: BTreeMap<String, BTreeSet<RelationKey>>,
}

/// Loads a store from an N-Triples stream and an optional ontology TSV
/// stream.
pub fn load_kb<R: BufRead, O: BufRead>(
    triples: R,
    ontology: Option<O>,
    profile: Profile,
) -> Result<KbStore, LoadError> {
    let triples = read_ntriples(triples, &profile.prefixes)?;
    let records = match ontology {
        Some(reader) => read_ontology(reader, &profile.prefixes)?,
        None => Vec::new(),
    };
    KbStore::build(profile, triples, records)
}

impl KbStore {
    pub fn build(
        profile: Profile,
        triples: impl IntoIterator<Item = Triple>,
        records: impl IntoIterator<Item = OntologyRecord>,
    ) -> Result<Self, LoadError> {
        let mut store = KbStore {
            profile,
            terms: Vec::new(),
            ids: HashMap::new(),
            spo: BTreeSet::new(),
            pos: BTreeSet::new(),
            osp: BTreeSet::new(),
            parents: BTreeMap::new(),
            instance_counts: BTreeMap::new(),
            labels: BTreeMap::new(),
            relation_labels: BTreeMap::new(),
            variants: BTreeMap::new(),
            lexicon: BTreeMap::new(),
        };
        for t in triples {
            store.insert(t);
        }

        let type_pred = store.profile.type_predicate.clone();
        let subclass_pred = store.profile.subclass_predicate.clone();
        let mut derived_counts: BTreeMap<Iri, u64> = BTreeMap::new();
        let triples: Vec<Triple> = store.triples().collect();
        for t in triples {
            match (&t.subject, &t.object) {
                (_, Term::Iri(class)) if t.predicate == type_pred => {
                    *derived_counts.entry(class.clone()).or_default() += 1;
                }
                (Term::Iri(child), Term::Iri(parent)) if t.predicate == subclass_pred => {
                    store.parents.entry(child.clone()).or_default().insert(parent.clone());
                }
                _ => {}
            }
        }
        store.instance_counts = derived_counts;

        let mut overrides: Vec<(Iri, String)> = Vec::new();
        for record in records {
            match record {
                OntologyRecord::Subclass { child, parent } => {
                    store.parents.entry(child).or_default().insert(parent);
                }
                OntologyRecord::Count { class, instances } => {
                    store.instance_counts.insert(class, instances);
                }
                OntologyRecord::Label { iri, text } => overrides.push((iri, text)),
            }
        }
        store.check_acyclic()?;

        for (iri, text) in &overrides {
            store.labels.entry(iri.clone()).or_insert_with(|| text.clone());
        }
        store.build_lexicon(&overrides);
        Ok(store)
    }

    fn intern(&mut self, term: Term) -> TermId {
        if let Some(&id) = self.ids.get(&term) {
            return id;
        }
        let id = self.terms.len() as TermId;
        self.terms.push(term.clone());
        self.ids.insert(term, id);
        id
    }

    fn insert(&mut self, t: Triple) {
        let s = self.intern(t.subject);
        let p = self.intern(Term::Iri(t.predicate));
        let o = self.intern(t.object);
        self.spo.insert((s, p, o));
        self.pos.insert((p, o, s));
        self.osp.insert((o, s, p));
    }

    fn id(&self, term: &Term) -> Option<TermId> {
        self.ids.get(term).copied()
    }

    fn iri_id(&self, iri: &Iri) -> Option<TermId> {
        self.id(&Term::Iri(iri.clone()))
    }

    fn term(&self, id: TermId) -> &Term {
        &self.terms[id as usize]
    }

    fn predicate_iri(&self, id: TermId) -> &Iri {
        self.term(id).as_iri().expect("predicate ids always intern IRIs")
    }

    fn check_acyclic(&self) -> Result<(), LoadError> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            Open,
            Done,
        }
        fn visit<'a>(
            node: &'a Iri,
            parents: &'a BTreeMap<Iri, BTreeSet<Iri>>,
            marks: &mut HashMap<&'a Iri, Mark>,
            path: &mut Vec<&'a Iri>,
        ) -> Result<(), Vec<String>> {
            match marks.get(node) {
                Some(Mark::Done) => return Ok(()),
                Some(Mark::Open) => {
                    let start = path.iter().position(|n| *n == node).unwrap_or(0);
                    let mut cycle: Vec<String> = path[start..].iter().map(|n| n.to_string()).collect();
                    cycle.push(node.to_string());
                    return Err(cycle);
                }
                None => {}
            }
            marks.insert(node, Mark::Open);
            path.push(node);
            for parent in parents.get(node).into_iter().flatten() {
                visit(parent, parents, marks, path)?;
            }
            path.pop();
            marks.insert(node, Mark::Done);
            Ok(())
        }

        let mut marks = HashMap::new();
        for node in self.parents.keys() {
            visit(node, &self.parents, &mut marks, &mut Vec::new()).map_err(LoadError::HierarchyCycle)?;
        }
        Ok(())
    }

    fn relation_key(&self, predicate: &Iri) -> RelationKey {
        match self.profile.classify(predicate) {
            Some((_, local)) => RelationKey::Profile(local.to_string()),
            None => RelationKey::Other(predicate.clone()),
        }
    }

    /// Key a label record applies to. Wikidata property entities
    /// (`wd:P176`) label every variant of the property.
    fn label_key(&self, iri: &Iri) -> RelationKey {
        if self.profile.kind == ProfileKind::Wikidata {
            if let Some(local) = self.profile.prefixes.base("wd").and_then(|b| iri.as_str().strip_prefix(b)) {
                if is_property_id(local) {
                    return RelationKey::Profile(local.to_string());
                }
            }
        }
        self.relation_key(iri)
    }

    fn build_lexicon(&mut self, overrides: &[(Iri, String)]) {
        let predicates: BTreeSet<TermId> = self.pos.iter().map(|&(p, _, _)| p).collect();
        for p in predicates {
            let iri = self.predicate_iri(p).clone();
            let key = self.relation_key(&iri);
            self.variants.entry(key).or_default().insert(iri);
        }
        let mut override_labels: BTreeMap<RelationKey, Vec<String>> = BTreeMap::new();
        for (iri, text) in overrides {
            let key = self.label_key(iri);
            if self.variants.contains_key(&key) {
                override_labels.entry(key).or_default().push(text.clone());
            }
        }
        for key in self.variants.keys() {
            let local = match key {
                RelationKey::Profile(local) => local.clone(),
                RelationKey::Other(iri) => iri.local_name().to_string(),
            };
            let mut labels = override_labels.remove(key).unwrap_or_default();
            labels.push(local);
            labels.dedup();
            for label in &labels {
                self.lexicon.entry(normalize_label(label)).or_default().insert(key.clone());
            }
            self.relation_labels.insert(key.clone(), labels);
        }
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn len(&self) -> usize {
        self.spo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spo.is_empty()
    }

    pub fn triples(&self) -> impl Iterator<Item = Triple> + '_ {
        self.spo.iter().map(|&(s, p, o)| Triple {
            subject: self.term(s).clone(),
            predicate: self.predicate_iri(p).clone(),
            object: self.term(o).clone(),
        })
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        let (Some(s), Some(p), Some(o)) =
            (self.id(&triple.subject), self.iri_id(&triple.predicate), self.id(&triple.object))
        else {
            return false;
        };
        self.spo.contains(&(s, p, o))
    }

    /// Every distinct predicate IRI in the store.
    pub fn predicates(&self) -> impl Iterator<Item = &Iri> {
        self.variants.values().flatten()
    }

    pub fn has_predicate(&self, iri: &Iri) -> bool {
        self.iri_id(iri)
            .is_some_and(|p| self.pos.range((p, 0, 0)..=(p, TermId::MAX, TermId::MAX)).next().is_some())
    }

    pub fn lexicon_len(&self) -> usize {
        self.lexicon.len()
    }

    /// Display label of every relation in the store, sorted, no repeats.
    pub fn relation_labels(&self) -> Vec<String> {
        let labels: BTreeSet<String> = self.predicates().map(|p| self.relation_label(p)).collect();
        labels.into_iter().collect()
    }

    /// Classes mentioned by the hierarchy or instance counts.
    pub fn classes(&self) -> BTreeSet<&Iri> {
        self.parents
            .iter()
            .flat_map(|(child, parents)| std::iter::once(child).chain(parents))
            .chain(self.instance_counts.keys())
            .collect()
    }

    pub fn instance_count(&self, class: &Iri) -> u64 {
        self.instance_counts.get(class).copied().unwrap_or(0)
    }

    /// Predicates of all triples touching `entity`, in either position. Under
    /// the Wikidata profile, statement nodes reached through `p:` edges
    /// contribute their `ps:`/`pq:` predicates as well.
    pub fn relations_of(&self, entity: &Iri) -> BTreeSet<Iri> {
        let mut out = BTreeSet::new();
        let Some(e) = self.iri_id(entity) else {
            return out;
        };
        for &(_, p, o) in self.spo.range((e, 0, 0)..=(e, TermId::MAX, TermId::MAX)) {
            let predicate = self.predicate_iri(p);
            out.insert(predicate.clone());
            if self.profile.kind == ProfileKind::Wikidata
                && matches!(self.profile.classify(predicate), Some((RelationNamespace::Claim, _)))
            {
                for &(_, sp, _) in self.spo.range((o, 0, 0)..=(o, TermId::MAX, TermId::MAX)) {
                    out.insert(self.predicate_iri(sp).clone());
                }
            }
        }
        for &(_, _, p) in self.osp.range((e, 0, 0)..=(e, TermId::MAX, TermId::MAX)) {
            out.insert(self.predicate_iri(p).clone());
        }
        out
    }

    /// `p:` predicates leading to statement nodes that carry `qualifier`.
    pub fn qualifier_hosts(&self, qualifier: &Iri) -> BTreeSet<Iri> {
        let mut out = BTreeSet::new();
        let Some(q) = self.iri_id(qualifier) else {
            return out;
        };
        for &(_, _, statement) in self.pos.range((q, 0, 0)..=(q, TermId::MAX, TermId::MAX)) {
            for &(_, _, p) in self.osp.range((statement, 0, 0)..=(statement, TermId::MAX, TermId::MAX)) {
                let predicate = self.predicate_iri(p);
                if matches!(self.profile.classify(predicate), Some((RelationNamespace::Claim, _))) {
                    out.insert(predicate.clone());
                }
            }
        }
        out
    }

    /// Classes asserted for `entity` through the profile's type predicate.
    pub fn types_of(&self, entity: &Iri) -> BTreeSet<Iri> {
        let (Some(e), Some(t)) = (self.iri_id(entity), self.iri_id(&self.profile.type_predicate)) else {
            return BTreeSet::new();
        };
        self.spo
            .range((e, t, 0)..=(e, t, TermId::MAX))
            .filter_map(|&(_, _, o)| self.term(o).as_iri().cloned())
            .collect()
    }

    /// Strict transitive ancestors of `class`.
    pub fn ancestors(&self, class: &Iri) -> BTreeSet<Iri> {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<&Iri> = self.parents.get(class).into_iter().flatten().collect();
        while let Some(next) = stack.pop() {
            if seen.insert(next.clone()) {
                stack.extend(self.parents.get(next).into_iter().flatten());
            }
        }
        seen
    }

    /// Drops asserted classes that are ancestors of another asserted class,
    /// then picks the survivor with the most instances (ties: smallest IRI).
    pub fn most_specific_type(&self, entity: &Iri) -> Option<Iri> {
        let asserted = self.types_of(entity);
        let generic: BTreeSet<Iri> = asserted.iter().flat_map(|c| self.ancestors(c)).collect();
        asserted
            .into_iter()
            .filter(|c| !generic.contains(c))
            .min_by(|a, b| self.instance_count(b).cmp(&self.instance_count(a)).then_with(|| a.cmp(b)))
    }

    /// Display label for a class or entity: override if present, else the
    /// IRI's local name.
    pub fn label_of(&self, iri: &Iri) -> String {
        self.labels.get(iri).cloned().unwrap_or_else(|| iri.local_name().to_string())
    }

    /// Display label for a relation; all variants of one relation share it.
    pub fn relation_label(&self, predicate: &Iri) -> String {
        let key = self.relation_key(predicate);
        match self.relation_labels.get(&key).and_then(|labels| labels.first()) {
            Some(label) => label.clone(),
            None => match key {
                RelationKey::Profile(local) => local,
                RelationKey::Other(iri) => iri.local_name().to_string(),
            },
        }
    }

    /// All stored predicate IRIs whose relation carries `label` (after
    /// normalization).
    pub fn lookup_relation_label(&self, label: &str) -> BTreeSet<Iri> {
        self.lexicon
            .get(&normalize_label(label))
            .into_iter()
            .flatten()
            .flat_map(|key| self.variants.get(key).into_iter().flatten())
            .cloned()
            .collect()
    }

    /// First satisfying assignment of the conjunction, if any.
    pub fn match_graph(&self, patterns: &[TriplePattern]) -> Option<Binding> {
        let mut found = None;
        self.solve(patterns, |binding| {
            found = Some(binding);
            ControlFlow::Break(())
        });
        found
    }

    pub fn is_satisfiable(&self, patterns: &[TriplePattern]) -> bool {
        self.match_graph(patterns).is_some()
    }

    /// Every value `var` takes over all satisfying assignments.
    pub fn answers(&self, patterns: &[TriplePattern], var: &Variable) -> BTreeSet<Term> {
        let mut out = BTreeSet::new();
        self.solve(patterns, |binding| {
            if let Some(term) = binding.get(var) {
                out.insert(term.clone());
            }
            ControlFlow::Continue(())
        });
        out
    }

    fn solve(&self, patterns: &[TriplePattern], mut emit: impl FnMut(Binding) -> ControlFlow<()>) {
        let mut vars: Vec<Variable> = Vec::new();
        let mut compiled = Vec::with_capacity(patterns.len());
        for pattern in patterns {
            let Some(p) = self.iri_id(&pattern.predicate) else {
                return;
            };
            let mut slot = |term: &PatternTerm| -> Option<Slot> {
                Some(match term {
                    PatternTerm::Const(t) => Slot::Const(self.id(t)?),
                    PatternTerm::Var(v) => Slot::Var(match vars.iter().position(|x| x == v) {
                        Some(i) => i,
                        None => {
                            vars.push(v.clone());
                            vars.len() - 1
                        }
                    }),
                })
            };
            let (Some(s), Some(o)) = (slot(&pattern.subject), slot(&pattern.object)) else {
                return;
            };
            compiled.push(Compiled { s, p, o });
        }
        let mut assignment = vec![None; vars.len()];
        let mut done = vec![false; compiled.len()];
        let _ = self.backtrack(&compiled, &mut done, &mut assignment, &mut |assignment| {
            let binding = vars
                .iter()
                .zip(assignment)
                .filter_map(|(v, id)| id.map(|id| (v.clone(), self.term(id).clone())))
                .collect();
            emit(binding)
        });
    }

    fn backtrack(
        &self,
        patterns: &[Compiled],
        done: &mut [bool],
        assignment: &mut [Option<TermId>],
        emit: &mut dyn FnMut(&[Option<TermId>]) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        let resolve = |slot: Slot, assignment: &[Option<TermId>]| match slot {
            Slot::Const(id) => Some(id),
            Slot::Var(i) => assignment[i],
        };
        // Most-bound pattern first; lowest index on ties.
        let next = (0..patterns.len()).filter(|&i| !done[i]).max_by_key(|&i| {
            let p = &patterns[i];
            let bound = resolve(p.s, assignment).is_some() as u8 + resolve(p.o, assignment).is_some() as u8;
            (bound, std::cmp::Reverse(i))
        });
        let Some(idx) = next else {
            return emit(assignment);
        };
        let pat = patterns[idx];
        let s = resolve(pat.s, assignment);
        let o = resolve(pat.o, assignment);
        let candidates: Vec<(TermId, TermId)> = match (s, o) {
            (Some(s), Some(o)) => {
                if self.spo.contains(&(s, pat.p, o)) {
                    vec![(s, o)]
                } else {
                    vec![]
                }
            }
            (Some(s), None) => self
                .spo
                .range((s, pat.p, 0)..=(s, pat.p, TermId::MAX))
                .map(|&(s, _, o)| (s, o))
                .collect(),
            (None, Some(o)) => self
                .pos
                .range((pat.p, o, 0)..=(pat.p, o, TermId::MAX))
                .map(|&(_, o, s)| (s, o))
                .collect(),
            (None, None) => self
                .pos
                .range((pat.p, 0, 0)..=(pat.p, TermId::MAX, TermId::MAX))
                .map(|&(_, o, s)| (s, o))
                .collect(),
        };
        done[idx] = true;
        for (cs, co) in candidates {
            let saved = assignment.to_vec();
            if bind(pat.s, cs, assignment) && bind(pat.o, co, assignment) {
                if let ControlFlow::Break(()) = self.backtrack(patterns, done, assignment, emit) {
                    done[idx] = false;
                    return ControlFlow::Break(());
                }
            }
            assignment.copy_from_slice(&saved);
        }
        done[idx] = false;
        ControlFlow::Continue(())
    }
}

fn is_property_id(local: &str) -> bool {
    local.len() > 1 && local.starts_with('P') && local[1..].chars().all(|c| c.is_ascii_digit())
}

#[derive(Debug, Clone, Copy)]
enum Slot {
    Const(TermId),
    Var(usize),
}

#[derive(Debug, Clone, Copy)]
struct Compiled {
    s: Slot,
    p: TermId,
    o: Slot,
}

fn bind(slot: Slot, value: TermId, assignment: &mut [Option<TermId>]) -> bool {
    match slot {
        Slot::Const(id) => id == value,
        Slot::Var(i) => match assignment[i] {
            Some(existing) => existing == value,
            None => {
                assignment[i] = Some(value);
                true
            }
        },
    }
}

#[cfg(test)]
mod tests;
