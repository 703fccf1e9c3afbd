use std::collections::BTreeSet;

use proptest::prelude::*;

use super::*;

fn kb(profile: Profile, nt: &str, ontology: &str) -> KbStore {
    load_kb(nt.as_bytes(), Some(ontology.as_bytes()), profile).unwrap()
}

fn dbp(nt: &str) -> KbStore {
    kb(Profile::dbpedia(), nt, "")
}

fn iri(text: &str) -> Iri {
    Profile::wikidata().prefixes.expand_iri(&Profile::dbpedia().prefixes.expand(text)).unwrap()
}

fn var(name: &str) -> PatternTerm {
    PatternTerm::Var(Variable::new(name))
}

fn c(text: &str) -> PatternTerm {
    PatternTerm::iri(&iri(text))
}

#[test]
fn empty_stream_gives_empty_store() {
    let store = dbp("");
    assert!(store.is_empty());
    assert_eq!(store.lexicon_len(), 0);
}

#[test]
fn single_line_fixture() {
    let store = dbp("<ex:Plant1> <dbo:owningOrganisation> <ex:Ford> .\n");
    assert_eq!(store.len(), 1);
    assert!(store.contains(&Triple::new(iri("ex:Plant1"), iri("dbo:owningOrganisation"), iri("ex:Ford"))));
    assert_eq!(
        store.lookup_relation_label("owningOrganisation"),
        BTreeSet::from([iri("dbo:owningOrganisation")])
    );
}

#[test]
fn missing_terminal_dot_reports_line() {
    let err = load_kb(
        "<a:b> <a:c> <a:d> .\n<a:b> <a:c> <a:d>\n".as_bytes(),
        None::<&[u8]>,
        Profile::dbpedia(),
    )
    .unwrap_err();
    assert!(matches!(err, LoadError::NTriples { line: 2, .. }), "{err}");
}

#[test]
fn hierarchy_cycle_is_named() {
    let err = load_kb(
        "".as_bytes(),
        Some("subclass\tdbo:A\tdbo:B\nsubclass\tdbo:B\tdbo:C\nsubclass\tdbo:C\tdbo:A\n".as_bytes()),
        Profile::dbpedia(),
    )
    .unwrap_err();
    match err {
        LoadError::HierarchyCycle(cycle) => {
            assert_eq!(cycle.first(), cycle.last());
            assert_eq!(cycle.len(), 4);
            assert!(cycle.iter().any(|c| c.ends_with("/B")));
        }
        other => panic!("{other}"),
    }
}

#[test]
fn relations_of_outgoing_and_incoming() {
    let store = dbp("<ex:e> <dbo:state> <ex:x> .\n<ex:y> <dbo:manufacturer> <ex:f> .\n");
    assert_eq!(store.relations_of(&iri("ex:e")), BTreeSet::from([iri("dbo:state")]));
    assert_eq!(store.relations_of(&iri("ex:f")), BTreeSet::from([iri("dbo:manufacturer")]));
    assert!(store.relations_of(&iri("ex:unknown")).is_empty());
}

#[test]
fn relations_of_traverses_wikidata_statements() {
    // Hand enumeration: e -p:P176-> s gives p:P176; s -ps:P176-> x gives
    // ps:P176; x is not reached from e otherwise.
    let store = kb(
        Profile::wikidata(),
        "<wd:Q1> <p:P176> <wds:S1> .\n<wds:S1> <ps:P176> <wd:Q2> .\n",
        "label\twd:P176\tmanufacturer\n",
    );
    let rels = store.relations_of(&iri("wd:Q1"));
    assert_eq!(rels, BTreeSet::from([iri("p:P176"), iri("ps:P176")]));
    let labels: BTreeSet<String> = rels.iter().map(|r| store.relation_label(r)).collect();
    assert_eq!(labels, BTreeSet::from(["manufacturer".to_string()]));
}

#[test]
fn most_specific_type_prunes_ancestors() {
    let store = kb(
        Profile::dbpedia(),
        "<ex:e> <rdf:type> <dbo:Agent> .\n<ex:e> <rdf:type> <dbo:Organisation> .\n",
        "subclass\tdbo:Organisation\tdbo:Agent\n",
    );
    assert_eq!(store.most_specific_type(&iri("ex:e")), Some(iri("dbo:Organisation")));
}

#[test]
fn most_specific_type_prefers_larger_class() {
    let store = kb(
        Profile::dbpedia(),
        "<ex:e> <rdf:type> <dbo:A> .\n<ex:e> <rdf:type> <dbo:B> .\n",
        "count\tdbo:A\t10\ncount\tdbo:B\t3\n",
    );
    assert_eq!(store.most_specific_type(&iri("ex:e")), Some(iri("dbo:A")));
    // Tie on derived counts (1 each): lexicographic order.
    let tie = dbp("<ex:e> <rdf:type> <dbo:B> .\n<ex:e> <rdf:type> <dbo:A> .\n");
    assert_eq!(tie.most_specific_type(&iri("ex:e")), Some(iri("dbo:A")));
    assert_eq!(tie.most_specific_type(&iri("ex:none")), None);
}

#[test]
fn derived_instance_counts() {
    let store = dbp("<ex:a> <rdf:type> <dbo:A> .\n<ex:b> <rdf:type> <dbo:A> .\n<ex:b> <rdf:type> <dbo:B> .\n");
    assert_eq!(store.instance_count(&iri("dbo:A")), 2);
    assert_eq!(store.instance_count(&iri("dbo:B")), 1);
    assert_eq!(store.instance_count(&iri("dbo:C")), 0);
}

#[test]
fn label_lookup_variants() {
    let store = dbp(
        "<ex:ben> <dbo:almaMater> <ex:gonzaga> .\n<ex:ben> <dbp:almaMater> <ex:gonzaga> .\n<ex:p> <dbo:owningOrganisation> <ex:f> .\n",
    );
    assert_eq!(
        store.lookup_relation_label("almaMater"),
        BTreeSet::from([iri("dbo:almaMater"), iri("dbp:almaMater")])
    );
    assert_eq!(store.lookup_relation_label("alma mater"), store.lookup_relation_label("almaMater"));
    assert_eq!(
        store.lookup_relation_label("owningOrganisation"),
        BTreeSet::from([iri("dbo:owningOrganisation")])
    );
    assert!(store.lookup_relation_label("notARelation").is_empty());
}

#[test]
fn label_overrides_extend_lexicon() {
    let store = kb(
        Profile::wikidata(),
        "<wd:Q1> <wdt:P176> <wd:Q2> .\n<wd:Q1> <p:P176> _:s .\n_:s <ps:P176> <wd:Q2> .\n",
        "label\twd:P176\tmanufacturer\n",
    );
    let expected = BTreeSet::from([iri("wdt:P176"), iri("p:P176"), iri("ps:P176")]);
    assert_eq!(store.lookup_relation_label("manufacturer"), expected);
    assert_eq!(store.lookup_relation_label("P176"), expected);
    assert_eq!(store.relation_label(&iri("ps:P176")), "manufacturer");
}

#[test]
fn match_graph_join() {
    let store = dbp("<ex:e1> <ex:r1> <ex:c> .\n<ex:e2> <ex:r2> <ex:c> .\n");
    let g = [
        TriplePattern::new(c("ex:e1"), iri("ex:r1"), var("x")),
        TriplePattern::new(c("ex:e2"), iri("ex:r2"), var("x")),
    ];
    let b = store.match_graph(&g).unwrap();
    assert_eq!(b, Binding::from([(Variable::x(), Term::Iri(iri("ex:c")))]));

    let store = dbp("<ex:e1> <ex:r1> <ex:c> .\n<ex:e2> <ex:r2> <ex:d> .\n");
    assert_eq!(store.match_graph(&g), None);
}

#[test]
fn match_graph_two_variables() {
    // Hand join: (?y r ?x) has the single row (a, c); (e r2 ?x) needs x = c,
    // which (e, r2, c) supplies. Unique answer {y: a, x: c}.
    let store = dbp("<ex:a> <ex:r> <ex:c> .\n<ex:e> <ex:r2> <ex:c> .\n");
    let g = [
        TriplePattern::new(var("y"), iri("ex:r"), var("x")),
        TriplePattern::new(c("ex:e"), iri("ex:r2"), var("x")),
    ];
    let b = store.match_graph(&g).unwrap();
    assert_eq!(b[&Variable::y()], Term::Iri(iri("ex:a")));
    assert_eq!(b[&Variable::x()], Term::Iri(iri("ex:c")));
}

#[test]
fn answers_enumerates_all_bindings() {
    let store = dbp("<ex:e> <ex:r> <ex:a> .\n<ex:e> <ex:r> <ex:b> .\n<ex:f> <ex:s> <ex:b> .\n");
    let single = [TriplePattern::new(c("ex:e"), iri("ex:r"), var("x"))];
    assert_eq!(
        store.answers(&single, &Variable::x()),
        BTreeSet::from([Term::Iri(iri("ex:a")), Term::Iri(iri("ex:b"))])
    );
    let joined = [single[0].clone(), TriplePattern::new(c("ex:f"), iri("ex:s"), var("x"))];
    assert_eq!(store.answers(&joined, &Variable::x()), BTreeSet::from([Term::Iri(iri("ex:b"))]));
    let unsat = [TriplePattern::new(c("ex:e"), iri("ex:missing"), var("x"))];
    assert!(store.answers(&unsat, &Variable::x()).is_empty());
}

#[test]
fn repeated_variable_in_one_pattern() {
    let store = dbp("<ex:a> <ex:r> <ex:a> .\n<ex:a> <ex:r> <ex:b> .\n");
    let g = [TriplePattern::new(var("x"), iri("ex:r"), var("x"))];
    assert_eq!(store.answers(&g, &Variable::x()), BTreeSet::from([Term::Iri(iri("ex:a"))]));
}

#[test]
fn literals_match_on_lexical_form() {
    let store = dbp("<ex:a> <ex:year> \"1999\"^^<xsd:gYear> .\n");
    let g = [TriplePattern::new(var("x"), iri("ex:year"), PatternTerm::Const(Term::Literal("1999".into())))];
    assert!(store.is_satisfiable(&g));
}

// Random small stores over a fixed vocabulary.

const ENTITIES: [&str; 6] = ["ex:a", "ex:b", "ex:c", "ex:d", "ex:e", "ex:f"];
const PREDICATES: [&str; 5] = ["dbo:r", "dbp:r", "dbo:s", "ex:t", "rdf:type"];
const CLASSES: [&str; 4] = ["dbo:C0", "dbo:C1", "dbo:C2", "dbo:C3"];

fn arb_nt() -> impl Strategy<Value = String> {
    proptest::collection::vec((0..6usize, 0..5usize, 0..6usize), 0..30).prop_map(|rows| {
        rows.into_iter()
            .map(|(s, p, o)| {
                let object = if PREDICATES[p] == "rdf:type" { CLASSES[o % 4] } else { ENTITIES[o] };
                format!("<{}> <{}> <{}> .\n", ENTITIES[s], PREDICATES[p], object)
            })
            .collect()
    })
}

fn arb_hierarchy() -> impl Strategy<Value = String> {
    // Edges only from higher to lower index: acyclic by construction.
    proptest::collection::vec((1..4usize, 0..3usize), 0..5).prop_map(|edges| {
        edges
            .into_iter()
            .filter(|(child, parent)| parent < child)
            .map(|(child, parent)| format!("subclass\t{}\t{}\n", CLASSES[child], CLASSES[parent]))
            .collect()
    })
}

fn pattern_term(choice: usize) -> PatternTerm {
    match choice {
        0 => var("x"),
        1 => var("y"),
        n => c(ENTITIES[(n - 2) % ENTITIES.len()]),
    }
}

fn brute_force_satisfiable(store: &KbStore, g: &[TriplePattern]) -> bool {
    let domain: Vec<Term> = ENTITIES.iter().chain(CLASSES.iter()).map(|e| Term::Iri(iri(e))).collect();
    let ground = |t: &PatternTerm, x: &Term, y: &Term| match t {
        PatternTerm::Const(t) => t.clone(),
        PatternTerm::Var(v) if v.name() == "x" => x.clone(),
        PatternTerm::Var(_) => y.clone(),
    };
    domain.iter().any(|x| {
        domain.iter().any(|y| {
            g.iter().all(|p| {
                store.contains(&Triple {
                    subject: ground(&p.subject, x, y),
                    predicate: p.predicate.clone(),
                    object: ground(&p.object, x, y),
                })
            })
        })
    })
}

proptest! {
    #[test]
    fn every_predicate_is_a_relation_of_its_endpoints(nt in arb_nt()) {
        let store = dbp(&nt);
        for t in store.triples() {
            let Term::Iri(s) = &t.subject else { unreachable!() };
            prop_assert!(store.relations_of(s).contains(&t.predicate));
            if let Term::Iri(o) = &t.object {
                prop_assert!(store.relations_of(o).contains(&t.predicate));
            }
        }
    }

    #[test]
    fn lexicon_covers_local_names(nt in arb_nt()) {
        let store = dbp(&nt);
        for p in store.predicates() {
            prop_assert!(store.lookup_relation_label(p.local_name()).contains(p));
        }
    }

    #[test]
    fn load_is_idempotent(nt in arb_nt()) {
        let once = dbp(&nt);
        let twice = dbp(&format!("{nt}{nt}"));
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn most_specific_type_is_never_a_strict_ancestor(nt in arb_nt(), hierarchy in arb_hierarchy()) {
        let store = kb(Profile::dbpedia(), &nt, &hierarchy);
        for e in ENTITIES {
            let e = iri(e);
            if let Some(t) = store.most_specific_type(&e) {
                let asserted = store.types_of(&e);
                prop_assert!(asserted.contains(&t));
                for other in &asserted {
                    prop_assert!(!store.ancestors(other).contains(&t));
                }
            } else {
                prop_assert!(store.types_of(&e).is_empty());
            }
        }
    }

    #[test]
    fn match_graph_agrees_with_answers_and_brute_force(
        nt in arb_nt(),
        raw in proptest::collection::vec((0..8usize, 0..4usize, 0..8usize), 1..4),
    ) {
        let store = dbp(&nt);
        let g: Vec<TriplePattern> = raw
            .iter()
            .map(|&(s, p, o)| TriplePattern::new(pattern_term(s), iri(PREDICATES[p]), pattern_term(o)))
            .collect();
        let matched = store.match_graph(&g);
        prop_assert_eq!(matched.is_some(), brute_force_satisfiable(&store, &g));
        let vars: BTreeSet<&Variable> = g.iter().flat_map(|p| p.variables()).collect();
        for v in vars {
            prop_assert_eq!(matched.is_some(), !store.answers(&g, v).is_empty());
        }
        if let Some(binding) = matched {
            // The binding grounds every pattern to a stored triple.
            for p in &g {
                let ground = |t: &PatternTerm| match t {
                    PatternTerm::Const(t) => t.clone(),
                    PatternTerm::Var(v) => binding[v].clone(),
                };
                let triple = Triple::new(ground(&p.subject), p.predicate.clone(), ground(&p.object));
                prop_assert!(store.contains(&triple));
            }
        }
    }
}
